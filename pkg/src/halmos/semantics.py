"""Point sets of an affine space ``Hom(W(X), H)`` and the evaluation of formulas.

A point set is a Python ``int`` used as a bit-vector: bit ``i`` stands for the
point whose coordinates are the base-``n`` digits of ``i``, first variable least
significant.  Quantifiers are shifts and masks along one coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .algebra import FiniteAlgebra
from .errors import HalmosError, ParseError, SpaceMismatch, check_budget
from .formulas import And, Equality, Exists, Formula, Not, Or, free_variables
from .terms import Point, Substitution, Term, Var, _evaluate, term_variables, variable_set


def space_size(algebra: FiniteAlgebra, variables: Sequence[str]) -> int:
    return algebra.size ** len(variables)


def encode(p: Point) -> int:
    n = p.algebra.size
    index = 0
    for v in reversed(p.values):
        index = index * n + v
    return index


def decode(index: int, variables: Sequence[str], algebra: FiniteAlgebra) -> Point:
    n = algebra.size
    variables = tuple(variables)
    if not 0 <= index < n ** len(variables):
        raise IndexError(f"index {index} outside a space of {n ** len(variables)} points")
    values = []
    for _ in variables:
        index, r = divmod(index, n)
        values.append(r)
    return Point(variables, algebra, tuple(values))


@lru_cache(maxsize=256)
def _coordinates(n: int, k: int) -> np.ndarray:
    """Array of shape ``(k, n**k)``: row ``j`` holds coordinate ``j`` of every index."""
    idx = np.arange(n ** k, dtype=np.int64)
    return np.stack([(idx // n ** j) % n for j in range(k)]) if k else np.zeros((0, 1), dtype=np.int64)


def _pack(flags: np.ndarray) -> int:
    return int.from_bytes(np.packbits(flags.astype(bool), bitorder="little").tobytes(), "little")


def _unpack(bits: int, size: int) -> np.ndarray:
    raw = np.frombuffer(bits.to_bytes((size + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


@lru_cache(maxsize=1024)
def _slice_masks(n: int, k: int, j: int) -> tuple[int, ...]:
    coord = _coordinates(n, k)[j]
    return tuple(_pack(coord == v) for v in range(n))


def _cylinder(bits: int, n: int, k: int, j: int, exists: bool) -> int:
    """Saturate ``bits`` along coordinate ``j``: or-fold (exists) or and-fold (forall)."""
    stride = n ** j
    masks = _slice_masks(n, k, j)
    if exists:
        base = 0
        for v in range(n):
            base |= (bits & masks[v]) >> (v * stride)
    else:
        base = masks[0]
        for v in range(n):
            base &= (bits & masks[v]) >> (v * stride)
    out = 0
    for v in range(n):
        out |= base << (v * stride)
    return out


@dataclass(frozen=True)
class PointSet:
    """A subset of ``Hom(W(X), H)`` for an ordered variable list ``X``."""
    variables: tuple[str, ...]
    algebra: FiniteAlgebra
    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.size:
            raise ValueError("bit-vector longer than the space")

    @property
    def size(self) -> int:
        return self.algebra.size ** len(self.variables)

    @classmethod
    def empty(cls, variables: Sequence[str], algebra: FiniteAlgebra) -> "PointSet":
        return cls(tuple(variables), algebra, 0)

    @classmethod
    def full(cls, variables: Sequence[str], algebra: FiniteAlgebra) -> "PointSet":
        return cls(tuple(variables), algebra, (1 << space_size(algebra, variables)) - 1)

    @classmethod
    def from_points(cls, variables: Sequence[str], algebra: FiniteAlgebra,
                    points: Iterable[Point]) -> "PointSet":
        variables = tuple(variables)
        bits = 0
        for p in points:
            if p.variables != variables or p.algebra != algebra:
                raise SpaceMismatch(f"point {p} does not live in this space")
            bits |= 1 << encode(p)
        return cls(variables, algebra, bits)

    @classmethod
    def from_indices(cls, variables: Sequence[str], algebra: FiniteAlgebra,
                     indices: Iterable[int]) -> "PointSet":
        bits = 0
        for i in indices:
            bits |= 1 << i
        return cls(tuple(variables), algebra, bits)

    def _same_space(self, other: "PointSet") -> None:
        if self.variables != other.variables or (self.algebra is not other.algebra
                                                and self.algebra != other.algebra):
            raise SpaceMismatch(f"{self.variables} over {self.algebra.name} vs "
                                f"{other.variables} over {other.algebra.name}")

    def with_bits(self, bits: int) -> "PointSet":
        # same space, so only the range check is needed
        if bits < 0 or bits >> self.size:
            raise ValueError("bit-vector longer than the space")
        new = object.__new__(PointSet)
        object.__setattr__(new, "variables", self.variables)
        object.__setattr__(new, "algebra", self.algebra)
        object.__setattr__(new, "bits", bits)
        return new

    def __and__(self, other: "PointSet") -> "PointSet":
        self._same_space(other)
        return self.with_bits(self.bits & other.bits)

    def __or__(self, other: "PointSet") -> "PointSet":
        self._same_space(other)
        return self.with_bits(self.bits | other.bits)

    def __invert__(self) -> "PointSet":
        return self.with_bits(((1 << self.size) - 1) ^ self.bits)

    def __le__(self, other: "PointSet") -> bool:
        self._same_space(other)
        return self.bits & ~other.bits == 0

    def __ge__(self, other: "PointSet") -> bool:
        return other <= self

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __contains__(self, p: Point) -> bool:
        if p.variables != self.variables or p.algebra != self.algebra:
            raise SpaceMismatch(f"point {p} does not live in this space")
        return bool(self.bits >> encode(p) & 1)

    def __iter__(self) -> Iterator[Point]:
        for i in self.indices():
            yield decode(i, self.variables, self.algebra)

    def indices(self) -> list[int]:
        bits, out, i = self.bits, [], 0
        while bits:
            if bits & 1:
                out.append(i)
            bits >>= 1
            i += 1
        return out

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    @property
    def is_full(self) -> bool:
        return self.bits == (1 << self.size) - 1

    def as_array(self) -> np.ndarray:
        return _unpack(self.bits, self.size)

    def serialize(self) -> str:
        header = " ".join(["pointset", self.algebra.name, *self.variables])
        return header + "\n" + self.bits.to_bytes((self.size + 7) // 8, "little").hex() + "\n"

    def __str__(self):
        return "{" + "; ".join(str(p) for p in self) + "}"


def meet(a: PointSet, b: PointSet) -> PointSet:
    return a & b


def join(a: PointSet, b: PointSet) -> PointSet:
    return a | b


def complement(a: PointSet) -> PointSet:
    return ~a


def exists_q(a: PointSet, var: str) -> PointSet:
    try:
        j = a.variables.index(var)
    except ValueError:
        raise HalmosError(f"{var!r} is not a coordinate of {a.variables}") from None
    return a.with_bits(_cylinder(a.bits, a.algebra.size, len(a.variables), j, True))


def forall_q(a: PointSet, var: str) -> PointSet:
    try:
        j = a.variables.index(var)
    except ValueError:
        raise HalmosError(f"{var!r} is not a coordinate of {a.variables}") from None
    return a.with_bits(_cylinder(a.bits, a.algebra.size, len(a.variables), j, False))


def deserialize(text: str, algebra: FiniteAlgebra) -> PointSet:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) != 2 or not lines[0].startswith("pointset"):
        raise ParseError("expected a 'pointset' header and one hex line")
    head = lines[0].split()
    if len(head) < 2:
        raise ParseError("pointset header lacks the algebra name")
    if head[1] != algebra.name:
        raise SpaceMismatch(f"pointset is over {head[1]}, not {algebra.name}")
    variables = tuple(head[2:])
    size = space_size(algebra, variables)
    try:
        raw = bytes.fromhex(lines[1])
    except ValueError:
        raise ParseError("malformed hex payload", 2) from None
    if len(raw) != (size + 7) // 8:
        raise ParseError(f"payload has {len(raw)} bytes, expected {(size + 7) // 8}", 2)
    return PointSet(variables, algebra, int.from_bytes(raw, "little"))


# -- terms and formulas over a space ------------------------------------------

def term_values(t: Term, variables: Sequence[str], algebra: FiniteAlgebra,
                budget: int | None = None) -> np.ndarray:
    """Value of ``t`` at every point of the space, as an int array in index order."""
    variables = tuple(variables)
    size = space_size(algebra, variables)
    check_budget("point space", size, budget)
    coords = _coordinates(algebra.size, len(variables))
    return np.broadcast_to(_term_array(t, variables, algebra, coords), (size,))


def _term_array(t: Term, variables, algebra, coords):
    if isinstance(t, Var):
        try:
            return coords[variables.index(t.name)]
        except ValueError:
            raise HalmosError(f"variable {t.name!r} is not in {variables}") from None
    try:
        table = algebra.arrays[t.op]
    except KeyError:
        raise HalmosError(f"unknown operation {t.op!r}") from None
    if table.ndim != len(t.args):
        raise HalmosError(f"{t.op} expects {table.ndim} arguments, got {len(t.args)}")
    if not t.args:
        return np.asarray(table, dtype=np.int64)
    args = [np.asarray(_term_array(a, variables, algebra, coords)) for a in t.args]
    return table[tuple(args)]


def equality_set(w: Term, w2: Term, variables: Sequence[str], algebra: FiniteAlgebra,
                 budget: int | None = None) -> PointSet:
    variables = tuple(variables)
    left = term_values(w, variables, algebra, budget)
    right = term_values(w2, variables, algebra, budget)
    return PointSet(variables, algebra, _pack(left == right))


def pullback(s: Substitution, a: PointSet, budget: int | None = None) -> PointSet:
    """``s_*(A)``: the points ``nu`` over ``s.codomain`` with ``nu . s`` in ``A``."""
    if s.domain != a.variables:
        if set(s.domain) != set(a.variables):
            raise SpaceMismatch(f"substitution domain {s.domain} differs from {a.variables}")
        s = Substitution(a.variables, s.codomain, tuple(s[x] for x in a.variables))
    h = a.algebra
    n = h.size
    target = tuple(s.codomain)
    size = space_size(h, target)
    index = np.zeros(size, dtype=np.int64)
    for k, t in enumerate(s.images):
        index = index + term_values(t, target, h, budget) * (n ** k)
    return PointSet(target, h, _pack(a.as_array()[index]))


def val(u: Formula, variables: Sequence[str], algebra: FiniteAlgebra,
        budget: int | None = None) -> PointSet:
    """The set of points of ``Hom(W(X), H)`` satisfying ``u``."""
    variables = tuple(variables)
    extra = free_variables(u) - set(variables)
    if extra:
        raise HalmosError(f"free variables {sorted(extra)} are not in {variables}")
    check_budget("point space", space_size(algebra, variables), budget)
    return PointSet(variables, algebra, _val_bits(u, variables, algebra, budget))


def _val_bits(u: Formula, space: tuple[str, ...], h: FiniteAlgebra, budget) -> int:
    if isinstance(u, Equality):
        coords = _coordinates(h.size, len(space))
        left = _term_array(u.left, space, h, coords)
        right = _term_array(u.right, space, h, coords)
        size = h.size ** len(space)
        return _pack(np.broadcast_to(left == right, (size,)))
    if isinstance(u, Not):
        return ((1 << h.size ** len(space)) - 1) ^ _val_bits(u.body, space, h, budget)
    if isinstance(u, And):
        return _val_bits(u.left, space, h, budget) & _val_bits(u.right, space, h, budget)
    if isinstance(u, Or):
        return _val_bits(u.left, space, h, budget) | _val_bits(u.right, space, h, budget)
    exists = isinstance(u, Exists)
    n, k = h.size, len(space)
    if u.var in space:
        return _cylinder(_val_bits(u.body, space, h, budget), n, k, space.index(u.var), exists)
    # bound variable outside the space: adjoin it as the top coordinate, then fold it away
    check_budget("extended point space", n ** (k + 1), budget)
    inner = _val_bits(u.body, space + (u.var,), h, budget)
    block = n ** k
    low = (1 << block) - 1
    out = 0 if exists else low
    for v in range(n):
        piece = (inner >> (v * block)) & low
        out = out | piece if exists else out & piece
    return out


@lru_cache(maxsize=4096)
def _val_cached(u: Formula, variables: tuple[str, ...], algebra: FiniteAlgebra) -> PointSet:
    # membership queries tend to hit one formula at many points
    return val(u, variables, algebra)


def in_lker(u: Formula, p: Point) -> bool:
    return p in _val_cached(u, p.variables, p.algebra)


def in_theory(u: Formula, variables: Sequence[str], algebra: FiniteAlgebra) -> bool:
    return val(u, variables, algebra).is_full


def is_admissible(w: Term, w2: Term, algebra: FiniteAlgebra,
                  variables: Sequence[str] | None = None) -> bool:
    if variables is None:
        variables = sorted(term_variables(w) | term_variables(w2))
    return not equality_set(w, w2, variables, algebra).is_empty


def semantically_equal(u: Formula, v: Formula, algebras: Iterable[FiniteAlgebra]) -> bool:
    variables = tuple(sorted(free_variables(u) | free_variables(v)))
    return all(val(u, variables, h) == val(v, variables, h) for h in algebras)


def parse_point(text: str, variables: Sequence[str], algebra: FiniteAlgebra) -> Point:
    """Parse ``x=1, y=0`` (labels) into a point over ``variables``."""
    values = {}
    for part in text.replace(",", " ").split():
        name, sep, label = part.partition("=")
        if not sep or not name or not label:
            raise ParseError(f"malformed assignment {part!r}")
        if name in values:
            raise ParseError(f"variable {name!r} assigned twice")
        values[name] = label
    variables = variable_set(variables)
    unknown = set(values) - set(variables)
    if unknown:
        raise ParseError(f"unknown variables {sorted(unknown)}")
    try:
        return Point.from_labels(variables, algebra, values)
    except (KeyError, ValueError) as exc:
        raise ParseError(str(exc)) from None


def satisfies(u: Formula, algebra: FiniteAlgebra, env: Mapping[str, int]) -> bool:
    """Direct Tarskian satisfaction: quantifiers loop over the carrier."""
    if isinstance(u, Equality):
        return _evaluate(u.left, algebra, env) == _evaluate(u.right, algebra, env)
    if isinstance(u, Not):
        return not satisfies(u.body, algebra, env)
    if isinstance(u, And):
        return satisfies(u.left, algebra, env) and satisfies(u.right, algebra, env)
    if isinstance(u, Or):
        return satisfies(u.left, algebra, env) or satisfies(u.right, algebra, env)
    results = (satisfies(u.body, algebra, {**env, u.var: a}) for a in range(algebra.size))
    return any(results) if isinstance(u, Exists) else all(results)
