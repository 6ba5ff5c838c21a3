import contextlib

import pytest

from halmos.algebra import cyclic_group, direct_power, two_element_semilattice
from halmos.formulas import parse_formula
from halmos.galois import generate_pool

Z2 = cyclic_group(2)
Z3 = cyclic_group(3)
L2 = two_element_semilattice()
Z2SQ = direct_power(Z2, 2)
FIXTURES = {"Z2": Z2, "Z3": Z3, "L2": L2, "Z2^2": Z2SQ}

GROUP_EXTRAS = [
    "x = x", "!(x = e)", "!(add(x,x) = e)", "exists y. add(y,y) = x", "exists z. add(z,z) = x",
    "!(x = e) & !(add(x,x) = e)", "exists x. x = y", "forall z. add(z,x) = add(x,z)",
    "exists z. !(z = x) & !(z = y)", "x = y -> add(x,x) = add(y,y)", "!(exists z. add(z,z) = x)",
    "forall x. exists z. add(x,z) = e", "exists z. z = e",
]
LATTICE_EXTRAS = [
    "x = x", "x = zero", "!(x = one)", "meet(x,y) = x", "exists z. meet(z,x) = z & !(z = x)",
    "forall z. meet(z,x) = z", "exists z. !(z = x)", "exists x. x = y", "x = y -> meet(x,y) = x",
]

_POOLS = {}


def pool_for(h):
    """The shared formula pool for the signature of ``h``."""
    key = h.signature
    if key not in _POOLS:
        extras = GROUP_EXTRAS if "add" in key else LATTICE_EXTRAS
        _POOLS[key] = generate_pool(key, extra=[parse_formula(t, key) for t in extras])
    return _POOLS[key]


@pytest.fixture(params=list(FIXTURES), ids=list(FIXTURES))
def fixture_algebra(request):
    return FIXTURES[request.param]


_RESULTS = []


def record(criterion, ok, detail=""):
    _RESULTS.append((criterion, ok, detail))


@contextlib.contextmanager
def criterion(name):
    """Record PASS when the block finishes, FAIL (and re-raise) when it raises.
    The block may put a summary under ``info["detail"]``."""
    info = {"detail": ""}
    try:
        yield info
    except BaseException as exc:
        record(name, False, f"{type(exc).__name__}: {exc}"[:200])
        raise
    record(name, True, info["detail"])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}")
