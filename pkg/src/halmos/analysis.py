"""Types of points and the decision procedures built on them: isotypy, logical
homogeneity, saturation, orbit decomposition and local isomorphism.

For finite algebras two pointed structures have the same complete type exactly
when an isomorphism carries one tuple to the other, so type equality is decided
by :func:`~halmos.algebra.find_pair_isomorphism`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import (ElementMap, FiniteAlgebra, find_embedding, find_pair_isomorphism,
                      generated_subalgebra)
from .errors import HalmosError, SignatureMismatch, check_budget
from .formulas import (Formula, SpecialFormula, is_x_special, substitute_formula, to_dsl)
from .galois import (_automorphism_permutations, _formula_of, atomic_diagram, lg_closure,
                     minimize_conjunction, orbit_formula)
from .semantics import PointSet, decode, encode, in_lker, satisfies, val
from .terms import Point, Substitution, Term, Var, is_reserved, iter_points


def default_variables(k: int) -> tuple[str, ...]:
    return ("x", "y", "z")[:k] if k <= 3 else tuple(f"x{i}" for i in range(1, k + 1))


@dataclass(frozen=True)
class TypeHandle:
    """The type of a point, represented by the point itself."""
    point: Point

    @property
    def algebra(self) -> FiniteAlgebra:
        return self.point.algebra

    def __contains__(self, u) -> bool:
        return in_type(u, self.point)


def in_type(u: SpecialFormula | Formula, p: Point) -> bool:
    formula = _formula_of(u)
    if not is_x_special(formula, p.variables):
        raise HalmosError(f"{to_dsl(formula)} is not special for {p.variables}")
    return satisfies(formula, p.algebra, p.as_dict())


def special_substitution(u: Formula, variables: Sequence[str],
                         images: dict[str, Term] | None = None) -> Substitution:
    """A substitution fixing ``variables`` and sending each reserved variable of
    ``u`` to a term over ``variables`` (first variable by default)."""
    from .formulas import all_variables

    xs = tuple(variables)
    images = dict(images or {})
    reserved = sorted(v for v in all_variables(u) if is_reserved(v) and v not in xs)
    domain = list(xs)
    terms: list[Term] = [Var(x) for x in xs]
    for y in reserved:
        if y in images:
            t = images[y]
        elif xs:
            t = Var(xs[0])
        else:
            continue
        domain.append(y)
        terms.append(t)
    return Substitution(tuple(domain), xs, tuple(terms))


def type_criterion_check(u: SpecialFormula | Formula, p: Point,
                         images: dict[str, Term] | None = None) -> bool:
    """Decide ``u in Tp(p)`` as ``s_* u in LKer(p)`` for a special substitution ``s``."""
    formula = _formula_of(u)
    if not is_x_special(formula, p.variables):
        raise HalmosError(f"{to_dsl(formula)} is not special for {p.variables}")
    s = special_substitution(formula, p.variables, images)
    return in_lker(substitute_formula(s, formula), p)


def types_equal(p: Point, q: Point, pool: Iterable | None = None) -> bool:
    if p.variables != q.variables:
        raise HalmosError("points must share the variable set")
    if p.algebra.signature != q.algebra.signature:
        return False
    if pool is not None:
        for u in pool:
            if in_lker(_formula_of(u), p) != in_lker(_formula_of(u), q):
                return False
    return find_pair_isomorphism(p.algebra, p.values, q.algebra, q.values) is not None


# -- reports -------------------------------------------------------------------

@dataclass
class IsotypyVerdict:
    isotypic: bool
    max_arity: int
    witness_point: Point | None = None
    witness_formula: Formula | None = None
    certificate: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return f"isotypic_up_to({self.max_arity})" if self.isotypic else "distinguished"

    def report(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        if self.witness_point is not None:
            lines.append(f"witness_algebra: {self.witness_point.algebra.name}")
            lines.append(f"witness_point: {self.witness_point}")
        if self.witness_formula is not None:
            lines.append(f"witness_formula: {to_dsl(self.witness_formula)}")
        lines.extend(f"certificate: {c}" for c in self.certificate)
        return "\n".join(lines) + "\n"


def _map_point(p: Point, f: ElementMap) -> Point:
    return Point(p.variables, f.target, tuple(f.map[v] for v in p.values))


def are_isotypic(h1: FiniteAlgebra, h2: FiniteAlgebra, max_arity: int = 3) -> IsotypyVerdict:
    """Compare the realized point types of ``h1`` and ``h2`` for up to ``max_arity``
    variables; on failure mine a formula realized on one side only."""
    if max_arity < 1:
        raise ValueError("max_arity must be at least 1")
    if h1.signature != h2.signature:
        raise SignatureMismatch(f"{h1.name} and {h2.name} have different signatures")
    iso = find_pair_isomorphism(h1, (), h2, ())
    inverse = iso.inverse() if iso is not None else None
    for k in range(1, max_arity + 1):
        xs = default_variables(k)
        failures = []
        for src, dst, f in ((h1, h2, iso), (h2, h1, inverse)):
            for p in iter_points(xs, src):
                if f is not None and types_equal(p, _map_point(p, f)):
                    continue
                if f is None and any(types_equal(p, q) for q in iter_points(xs, dst)):
                    continue
                failures.append((p, dst))
        if failures:
            if iso is not None:
                raise HalmosError("bounded type comparison disagrees with the isomorphism search")
            point, formula, other = _distinguish(failures)
            cert = [f"val on {point.algebra.name} contains {point}",
                    f"val on {other.name} is empty"]
            return IsotypyVerdict(False, max_arity, point, formula, cert)
    if iso is None:
        raise HalmosError("bounded type comparison disagrees with the isomorphism search")
    labels = ", ".join(f"{a}->{b}" for a, b in iso.labels().items())
    return IsotypyVerdict(True, max_arity, certificate=[f"isomorphism {labels}"])


def _distinguish(failures) -> tuple[Point, Formula, FiniteAlgebra]:
    for p, other in failures:
        diagram = atomic_diagram(p)
        if val(diagram, p.variables, other).is_empty:
            target = PointSet.from_points(p.variables, p.algebra, [p])
            return p, minimize_conjunction(diagram, target, [(p.variables, other)]), other
    p, other = failures[0]
    formula = orbit_formula(p)
    if not val(formula, p.variables, other).is_empty:
        raise HalmosError(f"no separating formula found for {p}")
    return p, formula, other


@dataclass
class HomogeneityReport:
    holds: bool
    variables: tuple[str, ...]
    counterexample: tuple[Point, Point] | None = None
    conjugators: list[tuple[Point, Point, ElementMap]] = field(default_factory=list)

    def report(self) -> str:
        lines = [f"verdict: {'homogeneous' if self.holds else 'not_homogeneous'}"]
        if self.counterexample:
            p, q = self.counterexample
            lines.append(f"witness_point: {p}")
            lines.append(f"witness_point: {q}")
        for p, q, sigma in self.conjugators:
            lines.append(f"certificate: ({p}) -> ({q}) by {list(sigma.map)}")
        return "\n".join(lines) + "\n"


def orbit_decomposition(h: FiniteAlgebra, variables: Sequence[str]) -> list[PointSet]:
    """Aut(H)-orbits of the space, ordered by their smallest point index."""
    xs = tuple(variables)
    size = h.size ** len(xs)
    check_budget("point space", size)
    perms = _automorphism_permutations(h, len(xs))
    label = np.full(size, -1, dtype=np.int64)
    orbits = []
    for i in range(size):
        if label[i] >= 0:
            continue
        members = sorted({int(idx[i]) for _, idx in perms})
        label[members] = len(orbits)
        orbits.append(PointSet.from_indices(xs, h, members))
    return orbits


def is_logically_homogeneous(h: FiniteAlgebra, variables: Sequence[str]) -> HomogeneityReport:
    """Check that equal types coincide with automorphism conjugacy on the space.

    Types are compared for every orbit representative against every point;
    for each conjugate pair the conjugating automorphism is recorded.
    """
    xs = tuple(variables)
    perms = _automorphism_permutations(h, len(xs))
    report = HomogeneityReport(True, xs)
    for orbit in orbit_decomposition(h, xs):
        r = orbit.indices()[0]
        rep = decode(r, xs, h)
        for q in iter_points(xs, h):
            j = encode(q)
            sigma = next((s for s, idx in perms if idx[r] == j), None)
            if types_equal(rep, q) != (sigma is not None):
                report.holds = False
                report.counterexample = (rep, q)
                return report
            if sigma is not None and j != r:
                report.conjugators.append((rep, q, sigma))
    return report


@dataclass
class SaturationReport:
    holds: bool
    variables: tuple[str, ...]
    certificates: list[tuple[PointSet, Point]] = field(default_factory=list)

    def report(self) -> str:
        lines = [f"verdict: {'saturated' if self.holds else 'not_saturated'}",
                 f"atoms: {len(self.certificates)}"]
        for atom, p in self.certificates:
            lines.append(f"certificate: atom {atom} realized by {p}")
        return "\n".join(lines) + "\n"


def is_lg_saturated(h: FiniteAlgebra, variables: Sequence[str]) -> SaturationReport:
    """Every atom of the algebra of definable sets is realized by a point whose
    own definable closure is that atom."""
    xs = tuple(variables)
    report = SaturationReport(True, xs)
    covered = 0
    for atom in orbit_decomposition(h, xs):
        if atom.is_empty or covered & atom.bits:
            report.holds = False
            continue
        covered |= atom.bits
        rep = next(iter(atom))
        if lg_closure(atom) != atom or lg_closure(PointSet.from_points(xs, h, [rep])) != atom:
            report.holds = False
        report.certificates.append((atom, rep))
    if covered != (1 << h.size ** len(xs)) - 1:
        report.holds = False
    return report


@dataclass
class LocalIsoReport:
    forward: bool
    backward: bool
    max_generators: int
    witnesses: list[tuple[str, tuple[str, ...], dict[str, str] | None]] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.forward and self.backward

    def report(self) -> str:
        lines = [f"verdict: {'locally_isomorphic' if self.holds else 'not_locally_isomorphic'}",
                 f"forward: {str(self.forward).lower()}", f"backward: {str(self.backward).lower()}"]
        for direction, seed, emb in self.witnesses:
            shown = "none" if emb is None else ", ".join(f"{a}->{b}" for a, b in emb.items())
            lines.append(f"certificate: {direction} seed ({' '.join(seed)}) embedding {shown}")
        return "\n".join(lines) + "\n"


def _embeds_all(src: FiniteAlgebra, dst: FiniteAlgebra, g: int, direction: str, witnesses) -> bool:
    seen = set()
    ok = True
    for r in range(g + 1):
        for seed in itertools.combinations(range(src.size), r):
            sub = generated_subalgebra(src, seed)
            if sub in seen:
                continue
            seen.add(sub)
            emb = find_embedding(src, seed, dst)
            labels = tuple(src.carrier[a] for a in seed)
            shown = None if emb is None else {src.carrier[a]: dst.carrier[b] for a, b in sorted(emb.items())}
            witnesses.append((direction, labels, shown))
            if emb is None:
                ok = False
    return ok


def locally_isomorphic(h1: FiniteAlgebra, h2: FiniteAlgebra, max_generators: int = 2) -> LocalIsoReport:
    """Whether every subalgebra generated by at most ``max_generators`` elements on
    either side embeds into the other algebra."""
    if h1.signature != h2.signature:
        raise SignatureMismatch(f"{h1.name} and {h2.name} have different signatures")
    witnesses: list = []
    forward = _embeds_all(h1, h2, max_generators, "forward", witnesses)
    backward = _embeds_all(h2, h1, max_generators, "backward", witnesses)
    return LocalIsoReport(forward, backward, max_generators, witnesses)
