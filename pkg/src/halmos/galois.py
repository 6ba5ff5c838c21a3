"""The algebraic, logical and model-theoretic Galois correspondences between
sets of equations/formulas and sets of points, with their closures.

Infinite objects (kernels, filters, types) are never materialized; the
"up" direction of each correspondence is exposed as a membership test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .algebra import ElementMap, FiniteAlgebra, Signature, automorphisms
from .errors import HalmosError, SpaceMismatch, check_budget
from .formulas import (And, Equality, Exists, Forall, Formula, Not, Or, SpecialFormula,
                       conjunction, free_variables, fresh_names, is_x_special, specialize, to_dsl)
from .semantics import (PointSet, _coordinates, _pack, equality_set, pullback, satisfies,
                        space_size, term_values, val)
from .terms import App, Point, Substitution, Term, Var, enumerate_terms, evaluate, iter_points
from .terms import term_depth as _term_depth

EquationSet = Sequence[tuple[Term, Term]]


@dataclass(frozen=True)
class FormulaPool:
    """A finite list of formulas plus the parameters that produced it."""
    formulas: tuple
    parameters: dict = field(default_factory=dict, compare=False, hash=False)

    def __iter__(self):
        return iter(self.formulas)

    def __len__(self):
        return len(self.formulas)

    def __getitem__(self, i):
        return self.formulas[i]

    def specialized(self, variables: Sequence[str]) -> "FormulaPool":
        return FormulaPool(tuple(specialize(u, variables) for u in self.formulas),
                           {**self.parameters, "specialized_for": tuple(variables)})


def _formula_of(u) -> Formula:
    return u.formula if isinstance(u, SpecialFormula) else u


# -- algebraic geometry --------------------------------------------------------

def ag_solutions(equations: EquationSet, variables: Sequence[str], algebra: FiniteAlgebra) -> PointSet:
    out = PointSet.full(variables, algebra)
    for w, w2 in equations:
        out = out & equality_set(w, w2, variables, algebra)
    return out


def ag_up_contains(a: PointSet, w: Term, w2: Term) -> bool:
    """Whether ``w = w2`` holds at every point of ``a`` (membership in ``A'``)."""
    return a <= equality_set(w, w2, a.variables, a.algebra)


def ag_closure(a: PointSet, budget: int | None = None) -> PointSet:
    """``A''``: points whose kernel contains the common kernel of ``A``.

    The joint map ``W(X) -> H^A`` factors through the subalgebra ``S`` of the
    direct power generated by the coordinate tuples; a point belongs to the
    closure iff sending the generators to its coordinates extends to a
    homomorphism ``S -> H``.  ``S`` is built with one derivation per element,
    and the homomorphism condition is checked on every operation-table entry of
    ``S`` for all points of the space at once.
    For empty ``A`` every equation holds vacuously, so the closure is the set of
    points at which all terms agree.
    """
    h, xs = a.algebra, a.variables
    points = list(a)
    gens = [tuple(p.values[k] for p in points) for k in range(len(xs))]
    m = len(points)

    index: dict[tuple, int] = {}
    elements: list[tuple] = []
    derivation: list[tuple] = []

    def add(elem, how):
        if elem not in index:
            check_budget("subalgebra of the direct power", len(elements) + 1, budget)
            index[elem] = len(elements)
            elements.append(elem)
            derivation.append(how)

    for k, g in enumerate(gens):
        add(g, ("var", k))
    for c in h.signature.constants:
        add((h.constant(c),) * m, ("op", c, ()))
    ops = [(op, arity) for op, arity in h.signature.operations if arity > 0]
    done = 0
    while done < len(elements):
        # close over every tuple that uses at least one element not seen before
        limit = len(elements)
        for op, arity in ops:
            for args in np.ndindex(*(limit,) * arity):
                if max(args) < done:
                    continue
                elem = tuple(h.apply(op, [elements[i][j] for i in args]) for j in range(m))
                add(elem, ("op", op, args))
        done = limit

    # values of each element of S under the candidate homomorphism, for every point
    size = space_size(h, xs)
    coords = _coordinates(h.size, len(xs))
    values: list[np.ndarray] = []
    for how in derivation:
        if how[0] == "var":
            values.append(coords[how[1]])
        else:
            _, op, args = how
            table = h.arrays[op]
            if not args:
                values.append(np.full(size, int(table), dtype=np.int64))
            else:
                values.append(table[tuple(values[i] for i in args)])
    ok = np.ones(size, dtype=bool)
    for k, g in enumerate(gens):
        ok &= values[index[g]] == coords[k]
    count = len(elements)
    for op, arity in h.signature.operations:
        table = h.arrays[op]
        for args in np.ndindex(*(count,) * arity):
            elem = tuple(h.apply(op, [elements[i][j] for i in args]) for j in range(m))
            expected = values[index[elem]]
            got = table[tuple(values[i] for i in args)] if arity else int(table)
            ok &= expected == got
    return a.with_bits(_pack(ok))


def term_functions(signature: Signature, variables: Sequence[str], algebra: FiniteAlgebra,
                   depth: int) -> list[np.ndarray]:
    """Distinct term functions of depth at most ``depth``, as value arrays over the space."""
    xs = tuple(variables)
    size = space_size(algebra, xs)
    coords = _coordinates(algebra.size, len(xs))
    seen: dict[bytes, np.ndarray] = {}

    def keep(arr):
        arr = np.ascontiguousarray(np.broadcast_to(arr, (size,)), dtype=np.int64)
        key = arr.tobytes()
        if key not in seen:
            seen[key] = arr
            return True
        return False

    for k in range(len(xs)):
        keep(coords[k])
    for c in signature.constants:
        keep(np.full(size, algebra.constant(c)))
    for _ in range(depth):
        current = list(seen.values())
        grew = False
        for op, arity in signature.operations:
            if arity == 0:
                continue
            table = algebra.arrays[op]
            for args in np.ndindex(*(len(current),) * arity):
                grew |= keep(table[tuple(current[i] for i in args)])
        if not grew:
            break
    return list(seen.values())


def term_closure(a: PointSet, depth: int = 3) -> PointSet:
    """``A''`` approximated by the equations between terms of bounded depth.

    Exact once ``depth`` reaches every term function over the space; the result
    is always a superset of the true closure.
    """
    h = a.algebra
    funcs = term_functions(h.signature, a.variables, h, depth)
    members = np.array(a.indices(), dtype=np.int64)
    groups: dict[bytes, list[np.ndarray]] = {}
    for f in funcs:
        groups.setdefault(f[members].tobytes(), []).append(f)
    ok = np.ones(a.size, dtype=bool)
    for fs in groups.values():
        for f in fs[1:]:
            ok &= f == fs[0]
    return a.with_bits(_pack(ok))


# -- logical geometry ----------------------------------------------------------

def lg_solutions(pool: Iterable, variables: Sequence[str], algebra: FiniteAlgebra) -> PointSet:
    out = PointSet.full(variables, algebra)
    for u in pool:
        out = out & val(_formula_of(u), variables, algebra)
    return out


def lg_up_contains(a: PointSet, u: Formula) -> bool:
    """Membership of ``u`` in the filter ``A^L``: ``A`` lies inside ``Val(u)``."""
    return a <= val(_formula_of(u), a.variables, a.algebra)


@lru_cache(maxsize=256)
def _automorphism_permutations(algebra: FiniteAlgebra, k: int) -> tuple[tuple[ElementMap, np.ndarray], ...]:
    """For each automorphism, where it sends every point index of a k-variable space."""
    n = algebra.size
    coords = _coordinates(n, k)
    out = []
    for sigma in automorphisms(algebra):
        m = np.asarray(sigma.map, dtype=np.int64)
        idx = np.zeros(n ** k, dtype=np.int64)
        for j in range(k):
            idx += m[coords[j]] * n ** j
        out.append((sigma, idx))
    return tuple(out)


def act(sigma: ElementMap, a: PointSet) -> PointSet:
    """Image of ``a`` under ``mu -> sigma . mu`` applied coordinatewise."""
    m = np.asarray(sigma.map, dtype=np.int64)
    n = a.algebra.size
    coords = _coordinates(n, len(a.variables))
    idx = np.zeros(a.size, dtype=np.int64)
    for j in range(len(a.variables)):
        idx += m[coords[j]] * n ** j
    out = np.zeros(a.size, dtype=bool)
    out[idx[a.as_array()]] = True
    return a.with_bits(_pack(out))


def lg_closure(a: PointSet) -> PointSet:
    """``A^LL`` as the union of the automorphism orbits of the points of ``A``."""
    check_budget("point space", a.size)
    flags = a.as_array()
    out = np.zeros(a.size, dtype=bool)
    for _, idx in _automorphism_permutations(a.algebra, len(a.variables)):
        out[idx[flags]] = True
    return a.with_bits(_pack(out))


def is_definable(a: PointSet) -> bool:
    return lg_closure(a) == a


def pool_closure(a: PointSet, pool: Iterable) -> PointSet:
    """Intersection of ``Val(u)`` over the pool formulas that hold on all of ``A``."""
    out = PointSet.full(a.variables, a.algebra)
    for u in pool:
        s = val(_formula_of(u), a.variables, a.algebra)
        if a <= s:
            out = out & s
    return out


# -- model-theoretic correspondence ---------------------------------------------

@lru_cache(maxsize=65536)
def type_set(u, variables: tuple[str, ...], algebra: FiniteAlgebra) -> PointSet:
    """``{mu : u in Tp(mu)}``, by direct satisfaction at every point."""
    formula = _formula_of(u)
    if not is_x_special(formula, variables):
        raise HalmosError(f"{to_dsl(formula)} is not special for {variables}")
    bits = 0
    for i, p in enumerate(iter_points(variables, algebra)):
        if satisfies(formula, algebra, p.as_dict()):
            bits |= 1 << i
    return PointSet(tuple(variables), algebra, bits)


def mt_solutions(pool: Iterable[SpecialFormula], variables: Sequence[str],
                 algebra: FiniteAlgebra) -> PointSet:
    xs = tuple(variables)
    out = PointSet.full(xs, algebra)
    for u in pool:
        out = out & type_set(u, xs, algebra)
    return out


def mt_up_contains(a: PointSet, u: SpecialFormula) -> bool:
    """Whether ``u`` lies in the type of every point of ``A``."""
    return a <= type_set(u, a.variables, a.algebra)


def mt_closure(a: PointSet) -> PointSet:
    """Same as :func:`lg_closure`: LG- and MT-definable sets coincide."""
    return lg_closure(a)


# -- morphisms and finite witnesses --------------------------------------------

def is_category_morphism(s: Substitution, a: PointSet, b: PointSet) -> bool:
    """Whether ``mu . s`` lands in ``B`` for every ``mu`` in ``A``.

    ``s`` maps the variables of ``B`` to terms over the variables of ``A``.
    """
    if a.algebra != b.algebra:
        raise SpaceMismatch("point sets over different algebras")
    if tuple(s.codomain) != a.variables:
        s = Substitution(s.domain, a.variables, s.images)
    return a <= pullback(s, b)


def noetherian_witness(pool: Iterable, variables: Sequence[str], algebra: FiniteAlgebra) -> FormulaPool:
    """Greedy finite subpool cutting out the same point set as the whole pool."""
    current = PointSet.full(variables, algebra)
    kept = []
    for u in pool:
        nxt = current & val(_formula_of(u), variables, algebra)
        if nxt != current:
            kept.append(u)
            current = nxt
    return FormulaPool(tuple(kept), {"source": "noetherian_witness"})


# -- formulas pinning points ------------------------------------------------------

def representative_terms(variables: Sequence[str], algebra: FiniteAlgebra, depth: int = 2) -> list[Term]:
    """One term per distinct term function of depth at most ``depth``, shallowest first."""
    xs = tuple(variables)
    seen = set()
    reps = []
    for t in enumerate_terms(algebra.signature, xs, depth):
        key = np.ascontiguousarray(term_values(t, xs, algebra), dtype=np.int64).tobytes()
        if key not in seen:
            seen.add(key)
            reps.append(t)
    return reps


def atomic_diagram(p: Point, depth: int = 2) -> Formula:
    """Conjunction of the equalities and negated equalities among representative
    terms of depth at most ``depth`` that hold at ``p``."""
    reps = representative_terms(p.variables, p.algebra, depth)
    values = [evaluate(t, p) for t in reps]
    literals: list[Formula] = []
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            eq = Equality(reps[i], reps[j])
            literals.append(eq if values[i] == values[j] else Not(eq))
    if not literals:
        return Equality(reps[0], reps[0]) if reps else Equality(Var(p.variables[0]), Var(p.variables[0]))
    return conjunction(literals)


def orbit_formula(p: Point) -> Formula:
    """A formula describing ``H`` up to isomorphism together with the position of ``p``.

    Satisfied at ``q`` (in any algebra of the signature) exactly when some
    isomorphism sends ``p`` to ``q``.
    """
    h = p.algebra
    n = h.size
    names = list(_take(fresh_names(p.variables), n + 1))
    zs, w = names[:n], names[n]
    parts: list[Formula] = []
    for i in range(n):
        for j in range(i + 1, n):
            parts.append(Not(Equality(Var(zs[i]), Var(zs[j]))))
    cover = Equality(Var(w), Var(zs[0]))
    for i in range(1, n):
        cover = Or(cover, Equality(Var(w), Var(zs[i])))
    parts.append(Forall(w, cover))
    for op, arity in h.signature.operations:
        for args in np.ndindex(*(n,) * arity):
            lhs = App(op, tuple(Var(zs[i]) for i in args))
            parts.append(Equality(lhs, Var(zs[h.apply(op, args)])))
    for x, v in zip(p.variables, p.values):
        parts.append(Equality(Var(x), Var(zs[v])))
    body = conjunction(parts)
    for z in reversed(zs):
        body = Exists(z, body)
    return body


def _take(it, k):
    for _ in range(k):
        yield next(it)


def minimize_conjunction(u: Formula, keep_true_at: PointSet, false_on: Sequence[tuple]) -> Formula:
    """Drop conjuncts of ``u`` while it stays true on ``keep_true_at`` and has no
    solution in any ``(variables, algebra)`` space listed in ``false_on``."""
    parts = _conjuncts(u)
    i = 0
    while i < len(parts) and len(parts) > 1:
        trial = parts[:i] + parts[i + 1:]
        cand = conjunction(trial)
        if keep_true_at <= val(cand, keep_true_at.variables, keep_true_at.algebra) and all(
                val(cand, xs, hh).is_empty for xs, hh in false_on):
            parts = trial
        else:
            i += 1
    return conjunction(parts)


def _conjuncts(u: Formula) -> list[Formula]:
    if isinstance(u, And):
        return _conjuncts(u.left) + _conjuncts(u.right)
    return [u]


# -- pools ---------------------------------------------------------------------

def generate_pool(signature: Signature, free: Sequence[str] = ("x", "y"), bound: Sequence[str] = ("z",),
                  depth: int = 3, term_depth: int = 2, atoms: int = 40, per_level: int = 70,
                  seed: int = 0, extra: Iterable[Formula] = ()) -> FormulaPool:
    """A deterministic finite sample of formulas with free variables in ``free``.

    Atoms are equalities between terms of depth at most ``term_depth`` over
    ``free + bound``; every shallow pair is included, deeper pairs are sampled.
    Each level then combines lower levels with the connectives and quantifiers.
    """
    rng = random.Random(seed)
    names = tuple(free) + tuple(bound)
    terms = enumerate_terms(signature, names, term_depth)
    shallow = [t for t in terms if _term_depth(t) == 0]
    deep = [t for t in terms if _term_depth(t) > 0]
    atom_list: list[Formula] = []
    for i, t in enumerate(shallow):
        for t2 in shallow[i:]:
            atom_list.append(Equality(t, t2))
    while len(atom_list) < atoms and deep:
        t = rng.choice(deep)
        t2 = rng.choice(shallow + deep)
        atom_list.append(Equality(t, t2))
    levels: list[list[Formula]] = [list(dict.fromkeys(atom_list))]
    for d in range(1, depth + 1):
        lower = [u for lev in levels for u in lev]
        top = levels[-1]
        layer = []
        for _ in range(per_level):
            kind = rng.choice(("not", "and", "or", "exists", "forall"))
            u = rng.choice(top)
            if kind == "not":
                layer.append(Not(u))
            elif kind in ("and", "or"):
                v = rng.choice(lower)
                if rng.random() < 0.5:
                    u, v = v, u
                layer.append(And(u, v) if kind == "and" else Or(u, v))
            else:
                fv = sorted(free_variables(u))
                var = rng.choice(fv) if fv and rng.random() < 0.85 else rng.choice(names)
                layer.append(Exists(var, u) if kind == "exists" else Forall(var, u))
        levels.append(list(dict.fromkeys(layer)))
    allowed = set(free)
    out = [u for lev in levels for u in lev if free_variables(u) <= allowed]
    out.extend(u for u in extra if free_variables(u) <= allowed)
    out = list(dict.fromkeys(out))
    params = dict(free=tuple(free), bound=tuple(bound), depth=depth, term_depth=term_depth,
                  atoms=atoms, per_level=per_level, seed=seed)
    return FormulaPool(tuple(out), params)
