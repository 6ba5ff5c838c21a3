"""The absolutely free term algebra over a signature and a finite variable set."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .algebra import FiniteAlgebra, Signature
from .errors import HalmosError

RESERVED_PREFIX = "_y"
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_reserved(name: str) -> bool:
    return name.startswith(RESERVED_PREFIX)


def variable_set(names: Iterable[str], allow_reserved: bool = False) -> tuple[str, ...]:
    """Validate an ordered list of distinct variable names."""
    names = tuple(names)
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate variables in {names}")
    for v in names:
        if not _IDENT.match(v):
            raise ValueError(f"{v!r} is not a valid variable name")
        if not allow_reserved and is_reserved(v):
            raise ValueError(f"{v!r} lies in the reserved namespace {RESERVED_PREFIX}*")
    return names


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    op: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.op
        return f"{self.op}({','.join(str(a) for a in self.args)})"


Term = Var | App


def term_variables(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    out = frozenset()
    for a in t.args:
        out |= term_variables(a)
    return out


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def check_term(t: Term, signature: Signature) -> None:
    if isinstance(t, Var):
        return
    if t.op not in signature:
        raise HalmosError(f"unknown operation {t.op!r}")
    if signature.arity(t.op) != len(t.args):
        raise HalmosError(f"{t.op} expects {signature.arity(t.op)} arguments, got {len(t.args)}")
    for a in t.args:
        check_term(a, signature)


def resolve_constants(t: Term, signature: Signature) -> Term:
    """Turn bare identifiers naming nullary operations into constant applications."""
    if isinstance(t, Var):
        if t.name in signature and signature.arity(t.name) == 0:
            return App(t.name, ())
        return t
    return App(t.op, tuple(resolve_constants(a, signature) for a in t.args))


@dataclass(frozen=True)
class Point:
    """An assignment of carrier elements (by index) to an ordered variable set."""
    variables: tuple[str, ...]
    algebra: FiniteAlgebra
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.variables) != len(self.values):
            raise ValueError("one value per variable required")
        for v in self.values:
            if not 0 <= v < self.algebra.size:
                raise ValueError(f"value {v} outside the carrier of {self.algebra.name}")

    @classmethod
    def from_labels(cls, variables: Sequence[str], algebra: FiniteAlgebra,
                    labels: Mapping[str, str] | Sequence[str]) -> "Point":
        variables = tuple(variables)
        if isinstance(labels, Mapping):
            missing = set(variables) - set(labels)
            if missing:
                raise ValueError(f"no value for {sorted(missing)}")
            labels = [labels[v] for v in variables]
        return cls(variables, algebra, tuple(algebra.index(str(lab)) for lab in labels))

    def __getitem__(self, name: str) -> int:
        try:
            return self.values[self.variables.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.variables, self.values))

    def __str__(self):
        return ", ".join(f"{v}={self.algebra.carrier[a]}" for v, a in zip(self.variables, self.values))


def evaluate(t: Term, p: Point) -> int:
    return _evaluate(t, p.algebra, p.as_dict())


def _evaluate(t: Term, h: FiniteAlgebra, env: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise HalmosError(f"variable {t.name!r} has no value") from None
    if t.op not in h.tables:
        raise HalmosError(f"unknown operation {t.op!r}")
    return h.apply(t.op, [_evaluate(a, h, env) for a in t.args])


@dataclass(frozen=True)
class Substitution:
    """A homomorphism ``W(domain) -> W(codomain)`` given on the generators."""
    domain: tuple[str, ...]
    codomain: tuple[str, ...]
    images: tuple[Term, ...]

    def __post_init__(self):
        if len(self.domain) != len(self.images):
            raise ValueError("substitution must be total on its domain")
        allowed = set(self.codomain)
        for t in self.images:
            extra = term_variables(t) - allowed
            if extra:
                raise ValueError(f"image term {t} uses variables {sorted(extra)} outside the codomain")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Term], codomain: Sequence[str],
                     domain: Sequence[str] | None = None) -> "Substitution":
        domain = tuple(mapping) if domain is None else tuple(domain)
        return cls(domain, tuple(codomain), tuple(mapping.get(x, Var(x)) for x in domain))

    @classmethod
    def identity(cls, variables: Sequence[str]) -> "Substitution":
        variables = tuple(variables)
        return cls(variables, variables, tuple(Var(x) for x in variables))

    def __getitem__(self, name: str) -> Term:
        return self.images[self.domain.index(name)]

    def as_dict(self) -> dict[str, Term]:
        return dict(zip(self.domain, self.images))

    def then(self, other: "Substitution") -> "Substitution":
        """The composite ``other after self``: first self, then other on the images."""
        return Substitution(self.domain, other.codomain,
                            tuple(apply_substitution(other, t) for t in self.images))

    def __str__(self):
        return ", ".join(f"{x}->{t}" for x, t in zip(self.domain, self.images))


def apply_substitution(s: Substitution | Mapping[str, Term], t: Term) -> Term:
    """Homomorphic extension of ``s``; variables outside its domain stay put."""
    mapping = s.as_dict() if isinstance(s, Substitution) else s
    return _subst(t, mapping)


def _subst(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    return App(t.op, tuple(_subst(a, mapping) for a in t.args))


def compose_point(p: Point, s: Substitution) -> Point:
    """The point ``x -> evaluate(s(x), p)`` over ``s.domain``."""
    env = p.as_dict()
    return Point(s.domain, p.algebra, tuple(_evaluate(t, p.algebra, env) for t in s.images))


def kernel_contains(p: Point, w: Term, w2: Term) -> bool:
    return evaluate(w, p) == evaluate(w2, p)


def enumerate_terms(signature: Signature, variables: Sequence[str], depth: int) -> list[Term]:
    """All terms of depth at most ``depth``, shallow first, in a fixed order."""
    levels: list[list[Term]] = [[Var(v) for v in variables] + [App(c) for c in signature.constants]]
    everything = list(levels[0])
    for d in range(1, depth + 1):
        layer = []
        for op, arity in signature.operations:
            if arity == 0:
                continue
            for args in itertools.product(everything, repeat=arity):
                if any(term_depth(a) == d - 1 for a in args):
                    layer.append(App(op, tuple(args)))
        levels.append(layer)
        everything = everything + layer
    return everything


def parse_term(text: str, signature: Signature | None = None) -> Term:
    from .formulas import _Parser  # shared tokenizer and term grammar

    parser = _Parser(text, signature)
    t = parser.term()
    parser.expect_end()
    return t


def iter_points(variables: Sequence[str], algebra: FiniteAlgebra) -> Iterator[Point]:
    """All points in index order (first variable varies fastest)."""
    variables = tuple(variables)
    for combo in itertools.product(range(algebra.size), repeat=len(variables)):
        yield Point(variables, algebra, tuple(reversed(combo)))
