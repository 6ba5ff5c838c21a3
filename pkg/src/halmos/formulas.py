"""First-order formulas with equality: AST, parser, printer, substitution and
the translation of arbitrary formulas into X-special ones."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .algebra import Signature
from .errors import HalmosError, ParseError
from .terms import (App, Substitution, Term, Var, _subst, check_term, is_reserved,
                    resolve_constants, term_variables, RESERVED_PREFIX)


@dataclass(frozen=True)
class Equality:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Equality | Not | And | Or | Exists | Forall


def implies(u: Formula, v: Formula) -> Formula:
    return Or(Not(u), v)


def conjunction(parts: Sequence[Formula]) -> Formula:
    """Left-nested conjunction of a nonempty list."""
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def free_variables(u: Formula) -> frozenset[str]:
    if isinstance(u, Equality):
        return term_variables(u.left) | term_variables(u.right)
    if isinstance(u, Not):
        return free_variables(u.body)
    if isinstance(u, (And, Or)):
        return free_variables(u.left) | free_variables(u.right)
    return free_variables(u.body) - {u.var}


def bound_variables(u: Formula) -> frozenset[str]:
    if isinstance(u, Equality):
        return frozenset()
    if isinstance(u, Not):
        return bound_variables(u.body)
    if isinstance(u, (And, Or)):
        return bound_variables(u.left) | bound_variables(u.right)
    return bound_variables(u.body) | {u.var}


def all_variables(u: Formula) -> frozenset[str]:
    if isinstance(u, Equality):
        return term_variables(u.left) | term_variables(u.right)
    if isinstance(u, Not):
        return all_variables(u.body)
    if isinstance(u, (And, Or)):
        return all_variables(u.left) | all_variables(u.right)
    return all_variables(u.body) | {u.var}


def formula_depth(u: Formula) -> int:
    if isinstance(u, Equality):
        return 0
    if isinstance(u, (Not, Exists, Forall)):
        return 1 + formula_depth(u.body)
    return 1 + max(formula_depth(u.left), formula_depth(u.right))


def quantifier_depth(u: Formula) -> int:
    if isinstance(u, Equality):
        return 0
    if isinstance(u, Not):
        return quantifier_depth(u.body)
    if isinstance(u, (And, Or)):
        return max(quantifier_depth(u.left), quantifier_depth(u.right))
    return 1 + quantifier_depth(u.body)


def equalities(u: Formula) -> Iterator[Equality]:
    if isinstance(u, Equality):
        yield u
    elif isinstance(u, (Not, Exists, Forall)):
        yield from equalities(u.body)
    else:
        yield from equalities(u.left)
        yield from equalities(u.right)


def check_formula(u: Formula, signature: Signature) -> None:
    for eq in equalities(u):
        check_term(eq.left, signature)
        check_term(eq.right, signature)


def fresh_names(avoid: Iterable[str]) -> Iterator[str]:
    """``_y1, _y2, ...`` skipping anything in ``avoid``."""
    taken = set(avoid)
    k = 0
    while True:
        k += 1
        name = f"{RESERVED_PREFIX}{k}"
        if name not in taken:
            taken.add(name)
            yield name


def _map_terms(u: Formula, mapping: dict, fresh: Iterator[str], rename_binder) -> Formula:
    if isinstance(u, Equality):
        return Equality(_subst(u.left, mapping), _subst(u.right, mapping))
    if isinstance(u, Not):
        return Not(_map_terms(u.body, mapping, fresh, rename_binder))
    if isinstance(u, (And, Or)):
        return type(u)(_map_terms(u.left, mapping, fresh, rename_binder),
                       _map_terms(u.right, mapping, fresh, rename_binder))
    inner = dict(mapping)
    if rename_binder(u.var):
        z = next(fresh)
        inner[u.var] = Var(z)
    else:
        z = u.var
        inner.pop(z, None)
    return type(u)(z, _map_terms(u.body, inner, fresh, rename_binder))


def substitute_formula(s: Substitution, u: Formula) -> Formula:
    """The action ``s_*``: substitute into every equality, renaming each binder to a
    fresh reserved variable first so that no image variable is captured."""
    avoid = set(all_variables(u)) | set(s.codomain) | set(s.domain)
    for t in s.images:
        avoid |= term_variables(t)
    return _map_terms(u, s.as_dict(), fresh_names(avoid), lambda v: True)


def rename_free(u: Formula, mapping: dict[str, str]) -> Formula:
    """Rename free variables (capture-avoiding)."""
    terms = {k: Var(v) for k, v in mapping.items()}
    avoid = set(all_variables(u)) | set(mapping) | set(mapping.values())
    fresh = fresh_names(avoid)
    targets = set(mapping.values())
    return _map_terms(u, terms, fresh, lambda v: v in targets)


def is_x_special(u: Formula, variables: Iterable[str]) -> bool:
    xs = set(variables)
    if not free_variables(u) <= xs:
        return False
    return all(is_reserved(v) and v not in xs for v in bound_variables(u))


@dataclass(frozen=True)
class SpecialFormula:
    formula: Formula
    variables: tuple[str, ...]
    certified: bool = False

    def __post_init__(self):
        if not is_x_special(self.formula, self.variables):
            raise HalmosError(f"{to_dsl(self.formula)} is not special for {self.variables}")

    def __str__(self):
        return to_dsl(self.formula)


def specialize(u: Formula, variables: Sequence[str]) -> SpecialFormula:
    """Translate ``u`` into an X-special formula satisfied at exactly the same points.

    Equalities and connectives are kept; every binder that is not already a
    reserved variable outside X is renamed to a fresh reserved one.
    """
    xs = tuple(variables)
    extra = free_variables(u) - set(xs)
    if extra:
        raise HalmosError(f"free variables {sorted(extra)} are not in {xs}")
    keep = set(xs)
    fresh = fresh_names(set(all_variables(u)) | keep)
    out = _map_terms(u, {}, fresh, lambda v: not (is_reserved(v) and v not in keep))
    return SpecialFormula(out, xs, certified=True)


# -- printing -----------------------------------------------------------------

_LEVEL = {Or: 1, And: 2, Not: 3, Equality: 4}


def to_dsl(u: Formula) -> str:
    return _show(u, 0)


def _show(u: Formula, context: int) -> str:
    if isinstance(u, (Exists, Forall)):
        kw = "exists" if isinstance(u, Exists) else "forall"
        text = f"{kw} {u.var}. {_show(u.body, 0)}"
        return text if context == 0 else f"({text})"
    if isinstance(u, Equality):
        return f"{u.left} = {u.right}"
    if isinstance(u, Not):
        if isinstance(u.body, Equality):
            return f"!({_show(u.body, 0)})"
        return "!" + _show(u.body, 3)
    level = _LEVEL[type(u)]
    sym = " | " if isinstance(u, Or) else " & "
    text = _show(u.left, level) + sym + _show(u.right, level + 1)
    return text if context <= level else f"({text})"


# -- parsing ------------------------------------------------------------------

_TOKENS = re.compile(r"(?P<ws>\s+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<arrow>->)|(?P<punct>[(),=!&|.])")


class _Parser:
    def __init__(self, text: str, signature: Signature | None = None):
        self.text = text
        self.signature = signature
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKENS.match(text, pos)
            if not m:
                self.fail(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.i = 0

    def fail(self, message: str, offset: int | None = None):
        if offset is None:
            offset = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        line = self.text.count("\n", 0, offset) + 1
        column = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        raise ParseError(message, line, column)

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.tokens[j][1] if j < len(self.tokens) else None

    def peek_kind(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.tokens[j][0] if j < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            self.fail(f"expected {expected!r}, found end of input" if expected else "unexpected end of input")
        if expected is not None and tok != expected:
            self.fail(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def expect_end(self):
        if self.i < len(self.tokens):
            self.fail(f"unexpected {self.peek()!r}")

    def ident(self) -> str:
        if self.peek_kind() != "ident" or self.peek() in ("exists", "forall"):
            self.fail("expected an identifier" + (f", found {self.peek()!r}" if self.peek() else ""))
        return self.take()

    def formula(self) -> Formula:
        if self.peek() in ("exists", "forall"):
            kw = self.take()
            var = self.ident()
            self.take(".")
            body = self.formula()
            return Exists(var, body) if kw == "exists" else Forall(var, body)
        return self.impl()

    def impl(self) -> Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return implies(left, self.impl())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while self.peek() == "|":
            self.take()
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.peek() == "&":
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        if self.peek() == "!":
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        if self.peek() == "(":
            self.take()
            inner = self.formula()
            self.take(")")
            return inner
        left = self.term()
        self.take("=")
        right = self.term()
        return Equality(left, right)

    def term(self) -> Term:
        start = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        name = self.ident()
        if self.peek() == "(":
            self.take()
            args = []
            if self.peek() != ")":
                args.append(self.term())
                while self.peek() == ",":
                    self.take()
                    args.append(self.term())
            self.take(")")
            t = App(name, tuple(args))
        else:
            t = Var(name)
        if self.signature is not None:
            t = resolve_constants(t, self.signature)
            if isinstance(t, App):
                if t.op not in self.signature:
                    self.fail(f"unknown operation {t.op!r}", start)
                if self.signature.arity(t.op) != len(t.args):
                    self.fail(f"{t.op} expects {self.signature.arity(t.op)} arguments, got {len(t.args)}", start)
        return t


def parse_formula(text: str, signature: Signature | None = None) -> Formula:
    """Parse the formula DSL.  With a signature, bare constant names become
    constant applications and arities are checked."""
    parser = _Parser(text, signature)
    if not parser.tokens:
        parser.fail("empty formula")
    u = parser.formula()
    parser.expect_end()
    return u


def load_pool(path, signature: Signature | None = None) -> list[Formula]:
    """One formula per line; ``#`` comments and blank lines are skipped."""
    from pathlib import Path

    out = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(parse_formula(line, signature))
        except ParseError as exc:
            raise ParseError(str(exc).split(": ", 1)[1], lineno, exc.column) from None
    return out
