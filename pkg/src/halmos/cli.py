"""Command-line front end.

Exit codes: 0 computed (whatever the verdict), 1 internal error, 2 usage or
parse error, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from . import analysis, galois
from .algebra import FiniteAlgebra, load_algebra, parse_algebra
from .errors import HalmosError, ParseError, ResourceError, default_budget
from .formulas import load_pool, parse_formula, specialize, substitute_formula, to_dsl
from .semantics import PointSet, in_theory, parse_point, val
from .terms import Substitution, parse_term, term_variables, variable_set

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

BUILTIN = {"z2": "z2.alg", "z3": "z3.alg", "l2": "l2.alg", "z3r": "z3_relabeled.alg"}


class UsageError(HalmosError):
    pass


def load_alg(spec: str) -> FiniteAlgebra:
    """A path to an algebra file, or one of the built-in names (z2, z3, l2, z3r)."""
    path = Path(spec)
    if path.exists():
        return load_algebra(path)
    if spec.lower() in BUILTIN:
        text = resources.files("halmos.data").joinpath(BUILTIN[spec.lower()]).read_text(encoding="utf-8")
        return parse_algebra(text)
    raise UsageError(f"no algebra file {spec!r}")


def _vars(tokens) -> tuple[str, ...]:
    names = []
    for tok in tokens or ():
        names.extend(v for v in tok.replace(",", " ").split() if v)
    try:
        return variable_set(names)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _split_trailing_formula(args) -> None:
    # `--vars x "exists x. x = x"`: the greedy --vars swallows the formula
    if getattr(args, "text", None) is None and args.vars:
        last = args.vars[-1]
        if not all(part.isidentifier() for part in last.replace(",", " ").split()):
            args.text = last
            args.vars = args.vars[:-1]


def _algebras(args, count: int) -> list[FiniteAlgebra]:
    specs = list(getattr(args, "algebras", None) or []) + list(args.alg or [])
    if len(specs) != count:
        raise UsageError(f"expected {count} algebra(s), got {len(specs)}")
    return [load_alg(s) for s in specs]


def _points(spec: str | None, variables, algebra) -> PointSet:
    if spec is None or spec.strip().lower() == "all":
        return PointSet.full(variables, algebra)
    if spec.strip().lower() in ("", "none", "empty"):
        return PointSet.empty(variables, algebra)
    path = Path(spec)
    if path.exists():
        chunks = [ln.split("#", 1)[0].strip() for ln in path.read_text(encoding="utf-8").splitlines()]
    else:
        chunks = [c.strip() for c in spec.split(";")]
    return PointSet.from_points(variables, algebra, [parse_point(c, variables, algebra) for c in chunks if c])


def _mapping(items, signature) -> dict:
    out = {}
    for item in items or ():
        name, sep, term = item.partition("=")
        if not sep or not name.strip().isidentifier():
            raise UsageError(f"expected VAR=TERM, got {item!r}")
        out[name.strip()] = parse_term(term, signature)
    return out


def _emit_set(out, a: PointSet, record: bool) -> None:
    out.append(f"card: {len(a)}")
    if not record:
        out.extend(f"member: {p}" for p in a)
    out.append(a.serialize().rstrip("\n"))


def cmd_eval(args) -> list[str]:
    (h,) = _algebras(args, 1)
    xs = _vars(args.vars)
    if args.pool:
        formulas = load_pool(args.pool, h.signature)
        result = galois.lg_solutions(formulas, xs, h)
        theory = result.is_full
    elif args.formula or args.text:
        u = parse_formula(args.formula or args.text, h.signature)
        result = val(u, xs, h, budget=args.budget)
        theory = in_theory(u, xs, h)
    else:
        raise UsageError("eval needs --formula or --pool")
    out: list[str] = []
    _emit_set(out, result, args.record)
    out.append(f"in_theory: {str(theory).lower()}")
    return out


def cmd_closure(args) -> list[str]:
    (h,) = _algebras(args, 1)
    xs = _vars(args.vars)
    a = _points(args.points, xs, h)
    approximate = False
    if args.kind == "ag":
        try:
            closed = galois.ag_closure(a, budget=args.budget)
        except ResourceError:
            closed = galois.term_closure(a, depth=args.depth)
            approximate = True
    elif args.kind == "lg":
        closed = galois.lg_closure(a)
    else:
        closed = galois.mt_closure(a)
    out: list[str] = [f"kind: {args.kind}"]
    _emit_set(out, closed, args.record)
    out.append(f"definable: {str(galois.is_definable(a)).lower()}")
    out.append(f"approximate: {str(approximate).lower()}")
    return out


def cmd_isotypic(args) -> list[str]:
    h1, h2 = _algebras(args, 2)
    return analysis.are_isotypic(h1, h2, args.max_arity).report().splitlines()


def cmd_local(args) -> list[str]:
    h1, h2 = _algebras(args, 2)
    return analysis.locally_isomorphic(h1, h2, args.max_generators).report().splitlines()


def cmd_orbits(args) -> list[str]:
    (h,) = _algebras(args, 1)
    orbits = analysis.orbit_decomposition(h, _vars(args.vars))
    out = [f"count: {len(orbits)}"]
    for orbit in orbits:
        out.append(f"orbit: {orbit}" if not args.record else "orbit: " + orbit.serialize().split("\n")[1])
    return out


def cmd_homogeneous(args) -> list[str]:
    (h,) = _algebras(args, 1)
    return analysis.is_logically_homogeneous(h, _vars(args.vars)).report().splitlines()


def cmd_saturated(args) -> list[str]:
    (h,) = _algebras(args, 1)
    return analysis.is_lg_saturated(h, _vars(args.vars)).report().splitlines()


def _optional_signature(args):
    specs = list(getattr(args, "algebras", None) or []) + list(args.alg or [])
    return load_alg(specs[0]).signature if specs else None


def cmd_subst(args) -> list[str]:
    signature = _optional_signature(args)
    text = args.formula or args.text
    if not text:
        raise UsageError("subst needs a formula")
    u = parse_formula(text, signature)
    mapping = _mapping(args.map, signature)
    if args.vars:
        codomain = _vars(args.vars)
    else:
        codomain = tuple(sorted(set().union(*(term_variables(t) for t in mapping.values())) if mapping else set()))
    s = Substitution.from_mapping(mapping, codomain)
    return [f"formula: {to_dsl(substitute_formula(s, u))}"]


def cmd_specialize(args) -> list[str]:
    signature = _optional_signature(args)
    text = args.formula or args.text
    if not text:
        raise UsageError("specialize needs a formula")
    xs = _vars(args.vars)
    su = specialize(parse_formula(text, signature), xs)
    return [f"formula: {to_dsl(su.formula)}", "special: true"]


def cmd_morphism(args) -> list[str]:
    (h,) = _algebras(args, 1)
    xs = _vars(args.vars)
    ys = _vars(args.target_vars)
    a = _points(args.points, xs, h)
    if args.target_formula:
        b = val(parse_formula(args.target_formula, h.signature), ys, h)
    else:
        b = _points(args.target_points, ys, h)
    mapping = _mapping(args.map, h.signature)
    missing = set(ys) - set(mapping)
    if missing:
        raise UsageError(f"--map gives no image for {sorted(missing)}")
    s = Substitution.from_mapping(mapping, xs, domain=ys)
    ok = galois.is_category_morphism(s, a, b)
    return [f"verdict: {'morphism' if ok else 'not_morphism'}"]


COMMANDS = {
    "eval": cmd_eval, "closure": cmd_closure, "isotypic": cmd_isotypic, "local": cmd_local,
    "orbits": cmd_orbits, "homogeneous": cmd_homogeneous, "saturated": cmd_saturated,
    "subst": cmd_subst, "specialize": cmd_specialize, "morphism": cmd_morphism,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alg", action="append", help="algebra file or built-in name (z2, z3, l2, z3r)")
    common.add_argument("--vars", nargs="+", help="variable list, space or comma separated")
    common.add_argument("--formula", help="formula in the DSL")
    common.add_argument("--pool", help="file with one formula per line")
    common.add_argument("--points", help="'all', 'none', a file, or inline 'x=1,y=0; x=2,y=2'")
    common.add_argument("--depth", type=int, default=3, help="term depth for enumeration fallbacks")
    common.add_argument("--budget", type=int, default=None, help="size budget (default: HALMOS_BUDGET or 2^24)")
    common.add_argument("--record", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(prog="halmos", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="point set of a formula")
    p.add_argument("algebras", nargs="*")
    p.set_defaults(text=None)

    p = sub.add_parser("closure", parents=[common], help="AG/LG/MT closure of a point set")
    p.add_argument("algebras", nargs="*")
    p.add_argument("--kind", choices=("ag", "lg", "mt"), required=True)

    for name, helptext in (("isotypic", "compare point types of two algebras"),
                           ("local", "local isomorphism of two algebras")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("algebras", nargs="*")
        p.add_argument("--max-arity", type=int, default=3)
        p.add_argument("--max-generators", type=int, default=2)

    for name in ("orbits", "homogeneous", "saturated"):
        p = sub.add_parser(name, parents=[common], help=f"{name} over the space of --vars")
        p.add_argument("algebras", nargs="*")

    p = sub.add_parser("subst", parents=[common], help="apply a substitution to a formula")
    p.add_argument("text", nargs="?")
    p.add_argument("--map", action="append", help="VAR=TERM, repeatable")

    p = sub.add_parser("specialize", parents=[common], help="X-special form of a formula")
    p.add_argument("text", nargs="?")

    p = sub.add_parser("morphism", parents=[common], help="check s: A -> B between point sets")
    p.add_argument("algebras", nargs="*")
    p.add_argument("--map", action="append", help="VAR=TERM for each target variable")
    p.add_argument("--target-vars", nargs="+", required=True)
    p.add_argument("--target-points")
    p.add_argument("--target-formula")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "text"):
        args.text = None
    _split_trailing_formula(args)
    if args.budget is None:
        args.budget = default_budget()
    elif args.budget <= 0:
        parser.error("--budget must be positive")
    try:
        lines = COMMANDS[args.command](args)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ParseError as exc:
        print(f"error: parse error at {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HalmosError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
