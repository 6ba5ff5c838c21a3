"""Finite algebras given by operation tables.

Elements are addressed by dense indices ``0..n-1`` in declared carrier order;
labels are only used for input and output.  Tables are flat row-major tuples,
so ``op(a1, ..., ak)`` lives at ``sum(a_i * n**(k-1-i))``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ParseError, SignatureMismatch, check_budget

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Signature:
    operations: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.operations]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate operation names in {names}")
        for name, arity in self.operations:
            if not _IDENT.match(name):
                raise ValueError(f"operation name {name!r} is not an identifier")
            if arity < 0:
                raise ValueError(f"negative arity for {name}")

    def arity(self, name: str) -> int:
        for op, arity in self.operations:
            if op == name:
                return arity
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(op == name for op, _ in self.operations)

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(name for name, arity in self.operations if arity == 0)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.operations)


class FiniteAlgebra:
    """A finite carrier with total operation tables.

    Instances are immutable; equality and hashing are by content.
    """

    def __init__(self, name: str, signature: Signature, carrier: Sequence[str],
                 tables: dict[str, Sequence[int]]):
        carrier = tuple(str(c) for c in carrier)
        if not carrier:
            raise ValueError("carrier must be nonempty")
        if len(set(carrier)) != len(carrier):
            raise ValueError("duplicate carrier labels")
        n = len(carrier)
        frozen: dict[str, tuple[int, ...]] = {}
        for op, arity in signature.operations:
            if op not in tables:
                raise ValueError(f"missing table for {op}")
            table = tuple(int(v) for v in tables[op])
            if len(table) != n ** arity:
                raise ValueError(f"table for {op}/{arity} has {len(table)} entries, expected {n ** arity}")
            if any(v < 0 or v >= n for v in table):
                raise ValueError(f"table for {op} has an entry outside the carrier")
            frozen[op] = table
        extra = set(tables) - set(signature.names)
        if extra:
            raise ValueError(f"tables for undeclared operations: {sorted(extra)}")
        self.name = name
        self.signature = signature
        self.carrier = carrier
        self.tables = frozen
        self._hash = hash((signature, carrier, tuple(sorted(frozen.items()))))

    @property
    def size(self) -> int:
        return len(self.carrier)

    def __len__(self) -> int:
        return len(self.carrier)

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return self is other or (self._hash == other._hash and self.signature == other.signature
                                 and self.carrier == other.carrier and self.tables == other.tables)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"FiniteAlgebra({self.name!r}, n={self.size}, ops={list(self.signature.names)})"

    def index(self, label: str) -> int:
        try:
            return self.carrier.index(str(label))
        except ValueError:
            raise KeyError(f"{label!r} is not an element of {self.name}") from None

    def apply(self, op: str, args: Sequence[int]) -> int:
        table = self.tables[op]
        pos = 0
        for a in args:
            pos = pos * self.size + a
        return table[pos]

    def constant(self, op: str) -> int:
        return self.tables[op][0]

    @cached_property
    def arrays(self) -> dict[str, np.ndarray]:
        """Tables as numpy arrays of shape ``(n,) * arity``."""
        n = self.size
        return {op: np.asarray(self.tables[op], dtype=np.int64).reshape((n,) * arity)
                for op, arity in self.signature.operations}


@dataclass(frozen=True)
class ElementMap:
    source: FiniteAlgebra
    target: FiniteAlgebra
    map: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.map[a]

    @property
    def is_bijective(self) -> bool:
        return self.source.size == self.target.size and len(set(self.map)) == len(self.map)

    def compose(self, inner: "ElementMap") -> "ElementMap":
        """``self after inner``."""
        return ElementMap(inner.source, self.target, tuple(self.map[v] for v in inner.map))

    def inverse(self) -> "ElementMap":
        if not self.is_bijective:
            raise ValueError("map is not bijective")
        inv = [0] * len(self.map)
        for a, b in enumerate(self.map):
            inv[b] = a
        return ElementMap(self.target, self.source, tuple(inv))

    def labels(self) -> dict[str, str]:
        return {self.source.carrier[a]: self.target.carrier[b] for a, b in enumerate(self.map)}


def _require_same_signature(h1: FiniteAlgebra, h2: FiniteAlgebra) -> None:
    if h1.signature != h2.signature:
        raise SignatureMismatch(f"{h1.name} and {h2.name} have different signatures")


def is_homomorphism(f: ElementMap) -> bool:
    _require_same_signature(f.source, f.target)
    if len(f.map) != f.source.size:
        raise ValueError("map is not total on the source carrier")
    src, dst = f.source, f.target
    for op, arity in src.signature.operations:
        for args in itertools.product(range(src.size), repeat=arity):
            if f.map[src.apply(op, args)] != dst.apply(op, [f.map[a] for a in args]):
                return False
    return True


def generated_subalgebra(h: FiniteAlgebra, seed) -> frozenset[int]:
    """Least subset containing ``seed`` and the constants, closed under all operations."""
    members = set(int(a) for a in seed)
    for c in h.signature.constants:
        members.add(h.constant(c))
    ops = [(op, arity) for op, arity in h.signature.operations if arity > 0]
    frontier = set(members)
    while frontier:
        new = set()
        current = sorted(members)
        for op, arity in ops:
            # only tuples touching the frontier can produce something new
            for args in itertools.product(current, repeat=arity):
                if frontier.isdisjoint(args):
                    continue
                r = h.apply(op, args)
                if r not in members:
                    new.add(r)
        members |= new
        frontier = new
    return frozenset(members)


def direct_power(h: FiniteAlgebra, k: int, budget: int | None = None) -> FiniteAlgebra:
    if k < 1:
        raise ValueError("k must be positive")
    n = h.size
    size = n ** k
    check_budget(f"direct power {h.name}^{k}", size, budget)
    for _, arity in h.signature.operations:
        check_budget(f"operation table of {h.name}^{k}", size ** arity, budget)
    elements = list(itertools.product(range(n), repeat=k))
    index = {e: i for i, e in enumerate(elements)}
    tables = {}
    for op, arity in h.signature.operations:
        tables[op] = [
            index[tuple(h.apply(op, [a[i] for a in args]) for i in range(k))]
            for args in itertools.product(elements, repeat=arity)
        ]
    labels = ["(" + ",".join(h.carrier[c] for c in e) + ")" for e in elements]
    return FiniteAlgebra(f"{h.name}^{k}", h.signature, labels, tables)


# -- backtracking over partial maps -------------------------------------------

def _propagate(h1: FiniteAlgebra, h2: FiniteAlgebra, f: list[int], used: list[bool],
               injective: bool) -> bool:
    """Close the partial map ``f`` under the operation tables.

    Returns False on a conflict.  ``f`` and ``used`` are updated in place.
    """
    ops = h1.signature.operations
    changed = True
    while changed:
        changed = False
        mapped = [a for a, b in enumerate(f) if b >= 0]
        for op, arity in ops:
            for args in itertools.product(mapped, repeat=arity):
                r1 = h1.apply(op, args)
                r2 = h2.apply(op, [f[a] for a in args])
                if f[r1] < 0:
                    if injective and used[r2]:
                        return False
                    f[r1] = r2
                    used[r2] = True
                    changed = True
                elif f[r1] != r2:
                    return False
            if changed:
                break
    return True


def _seed_map(h1, a, h2, b, injective: bool):
    f = [-1] * h1.size
    used = [False] * h2.size
    for x, y in zip(a, b):
        if f[x] >= 0:
            if f[x] != y:
                return None
            continue
        if injective and used[y]:
            return None
        f[x] = y
        used[y] = True
    return f, used


def _isomorphisms(h1: FiniteAlgebra, a: Sequence[int], h2: FiniteAlgebra,
                  b: Sequence[int]) -> Iterator[tuple[int, ...]]:
    if h1.size != h2.size:
        return
    start = _seed_map(h1, a, h2, b, injective=True)
    if start is None:
        return
    f, used = start
    if not _propagate(h1, h2, f, used, injective=True):
        return

    def search(f, used):
        try:
            x = f.index(-1)
        except ValueError:
            yield tuple(f)
            return
        for y in range(h2.size):
            if used[y]:
                continue
            g, u = list(f), list(used)
            g[x] = y
            u[y] = True
            if _propagate(h1, h2, g, u, injective=True):
                yield from search(g, u)

    yield from search(f, used)


def automorphisms(h: FiniteAlgebra) -> list[ElementMap]:
    """All automorphisms, sorted lexicographically (identity first)."""
    maps = sorted(_isomorphisms(h, (), h, ()))
    return [ElementMap(h, h, m) for m in maps]


def find_pair_isomorphism(h1: FiniteAlgebra, a: Sequence[int], h2: FiniteAlgebra,
                          b: Sequence[int]) -> ElementMap | None:
    """An isomorphism ``h1 -> h2`` sending ``a[i]`` to ``b[i]``, or None."""
    _require_same_signature(h1, h2)
    if len(a) != len(b):
        raise ValueError("tuples must have equal length")
    for m in _isomorphisms(h1, tuple(a), h2, tuple(b)):
        return ElementMap(h1, h2, m)
    return None


def find_embedding(h1: FiniteAlgebra, seed: Sequence[int], h2: FiniteAlgebra) -> dict[int, int] | None:
    """An injective homomorphism from the subalgebra generated by ``seed`` into ``h2``.

    Returned as a dict on the subalgebra's elements; None if no embedding exists.
    """
    _require_same_signature(h1, h2)
    seed = tuple(seed)
    for images in itertools.product(range(h2.size), repeat=len(seed)):
        start = _seed_map(h1, seed, h2, images, injective=True)
        if start is None:
            continue
        f, used = start
        for c in h1.signature.constants:
            x, y = h1.constant(c), h2.constant(c)
            if f[x] < 0:
                if used[y]:
                    f = None
                    break
                f[x] = y
                used[y] = True
            elif f[x] != y:
                f = None
                break
        if f is None:
            continue
        if _propagate(h1, h2, f, used, injective=True):
            return {x: y for x, y in enumerate(f) if y >= 0}
    return None


# -- constructors and file format ---------------------------------------------

GROUP_SIGNATURE = Signature((("add", 2), ("neg", 1), ("e", 0)))
SEMILATTICE_SIGNATURE = Signature((("meet", 2), ("zero", 0), ("one", 0)))


def cyclic_group(n: int, name: str | None = None) -> FiniteAlgebra:
    """The additive group Z_n with operations add, neg and the constant e."""
    tables = {
        "add": [(a + b) % n for a in range(n) for b in range(n)],
        "neg": [(-a) % n for a in range(n)],
        "e": [0],
    }
    return FiniteAlgebra(name or f"Z{n}", GROUP_SIGNATURE, [str(i) for i in range(n)], tables)


def two_element_semilattice(name: str = "L2") -> FiniteAlgebra:
    """The chain 0 < 1 under meet, with both elements named as constants."""
    tables = {"meet": [0, 0, 0, 1], "zero": [0], "one": [1]}
    return FiniteAlgebra(name, SEMILATTICE_SIGNATURE, ["0", "1"], tables)


def relabel(h: FiniteAlgebra, order: Sequence[int], labels: Sequence[str] | None = None,
            name: str | None = None) -> FiniteAlgebra:
    """Isomorphic copy where new element ``i`` is old element ``order[i]``."""
    n = h.size
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the carrier")
    new_of = {old: new for new, old in enumerate(order)}
    tables = {}
    for op, arity in h.signature.operations:
        tables[op] = [new_of[h.apply(op, [order[a] for a in args])]
                      for args in itertools.product(range(n), repeat=arity)]
    if labels is None:
        labels = [h.carrier[o] for o in order]
    return FiniteAlgebra(name or f"{h.name}'", h.signature, labels, tables)


def parse_algebra(text: str) -> FiniteAlgebra:
    name = None
    carrier: list[str] | None = None
    ops: list[tuple[str, int]] = []
    rows: dict[str, list[list[str]]] = {}
    row_lines: dict[str, list[int]] = {}
    header_line: dict[str, int] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("algebra") and (len(line) == 7 or line[7].isspace()):
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected 'algebra <name>'", lineno)
            name = parts[1]
            current = None
            continue
        if line.startswith("carrier"):
            head, sep, rest = line.partition(":")
            if not sep or head.strip() != "carrier":
                raise ParseError("expected 'carrier: <label> ...'", lineno)
            labels = rest.split()
            if not labels:
                raise ParseError("empty carrier", lineno)
            seen = set()
            for lab in labels:
                if lab in seen:
                    raise ParseError(f"duplicate label {lab!r}", lineno)
                seen.add(lab)
            carrier = labels
            current = None
            continue
        m = re.match(r"op\s+([A-Za-z_][A-Za-z0-9_]*)\s*/\s*(\d+)\s*:(.*)\Z", line)
        if m:
            op, arity = m.group(1), int(m.group(2))
            if op in rows:
                raise ParseError(f"duplicate operation {op!r}", lineno)
            ops.append((op, arity))
            rows[op] = []
            row_lines[op] = []
            header_line[op] = lineno
            current = op
            rest = m.group(3).split()
            if rest:
                rows[op].append(rest)
                row_lines[op].append(lineno)
            continue
        if current is None:
            raise ParseError(f"unexpected line {line!r}", lineno)
        rows[current].append(line.split())
        row_lines[current].append(lineno)
    if carrier is None:
        raise ParseError("missing carrier declaration", 1)
    n = len(carrier)
    index = {lab: i for i, lab in enumerate(carrier)}
    tables = {}
    for op, arity in ops:
        want_rows = 1 if arity == 0 else n ** (arity - 1)
        want_cols = 1 if arity == 0 else n
        got = rows[op]
        if len(got) != want_rows:
            where = row_lines[op][-1] if row_lines[op] else header_line[op]
            raise ParseError(f"operation {op}/{arity} needs {want_rows} rows, found {len(got)}", where)
        flat = []
        for cells, lineno in zip(got, row_lines[op]):
            if len(cells) != want_cols:
                raise ParseError(f"operation {op}/{arity} needs {want_cols} cells per row, found {len(cells)}",
                                 lineno)
            for cell in cells:
                if cell not in index:
                    raise ParseError(f"unknown element {cell!r}", lineno)
                flat.append(index[cell])
        tables[op] = flat
    return FiniteAlgebra(name or "H", Signature(tuple(ops)), carrier, tables)


def load_algebra(path) -> FiniteAlgebra:
    return parse_algebra(Path(path).read_text(encoding="utf-8"))


def dump_algebra(h: FiniteAlgebra) -> str:
    n = h.size
    lines = [f"algebra {h.name}", "carrier: " + " ".join(h.carrier)]
    for op, arity in h.signature.operations:
        lines.append(f"op {op}/{arity}:")
        table = [h.carrier[v] for v in h.tables[op]]
        width = 1 if arity == 0 else n
        for i in range(0, len(table), width):
            lines.append(" ".join(table[i:i + width]))
    return "\n".join(lines) + "\n"
