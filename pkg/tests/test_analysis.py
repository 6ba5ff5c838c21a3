import itertools

import pytest

from conftest import FIXTURES, L2, Z2, Z2SQ, Z3, pool_for
from oracles import brute_orbits, point_index

from halmos.algebra import GROUP_SIGNATURE, direct_power, find_pair_isomorphism, relabel
from halmos.analysis import (TypeHandle, are_isotypic, in_type, is_lg_saturated,
                             is_logically_homogeneous, locally_isomorphic, orbit_decomposition,
                             type_criterion_check, types_equal)
from halmos.errors import HalmosError, SignatureMismatch
from halmos.formulas import free_variables, parse_formula, specialize
from halmos.semantics import in_lker, val
from halmos.terms import App, Point, iter_points

G = GROUP_SIGNATURE
XY = ("x", "y")
Z3R = relabel(Z3, [2, 0, 1], labels=["a", "b", "c"], name="Z3r")


def f(text):
    return parse_formula(text, G)


class TestTypes:
    def test_in_type_examples(self):
        for h in FIXTURES.values():
            for p in iter_points(("x",), h):
                assert in_type(specialize(parse_formula("x = x"), ("x",)), p)
        assert in_type(f("exists _y1. add(_y1,_y1) = x"), Point(("x",), Z3, (1,)))
        assert not in_type(f("!(add(x,x) = e)"), Point(("x",), Z2, (1,)))

    def test_in_type_rejects_non_special(self):
        with pytest.raises(HalmosError):
            in_type(f("exists y. add(y,y) = x"), Point(("x",), Z3, (1,)))
        with pytest.raises(HalmosError):
            type_criterion_check(f("exists y. add(y,y) = x"), Point(("x",), Z3, (1,)))

    def test_criterion_examples(self):
        cases = [(specialize(parse_formula("x = x"), ("x",)), Point(("x",), Z3, (2,))),
                 (f("exists _y1. add(_y1,_y1) = x"), Point(("x",), Z3, (1,))),
                 (f("!(add(x,x) = e)"), Point(("x",), Z2, (1,)))]
        for u, p in cases:
            assert type_criterion_check(u, p) == in_type(u, p)

    def test_closed_formula_ignores_the_point(self):
        u = f("forall _y1. exists _y2. add(_y2, _y2) = _y1")
        assert {in_type(u, p) for p in iter_points(("x",), Z3)} == {True}
        assert {in_type(u, p) for p in iter_points(("x",), Z2)} == {False}

    def test_handle(self):
        handle = TypeHandle(Point(("x",), Z3, (1,)))
        assert f("!(x = e)") in handle and f("x = e") not in handle

    def test_types_equal_examples(self):
        p = Point(("x",), Z3, (1,))
        assert types_equal(p, p)
        assert types_equal(p, Point(("x",), Z3, (2,)))
        assert not types_equal(Point(("x",), Z2, (1,)), p)
        assert not types_equal(Point(("x",), Z3, (0,)), p)

    def test_types_equal_against_isomorphism(self):
        iso = find_pair_isomorphism(Z3, (), Z3R, ())
        p = Point(XY, Z3, (1, 2))
        for values in itertools.product(range(3), repeat=2):
            q = Point(XY, Z3R, values)
            assert types_equal(p, q) == (find_pair_isomorphism(Z3, (1, 2), Z3R, values) is not None)
        assert types_equal(p, Point(XY, Z3R, (iso(1), iso(2))))
        assert not types_equal(p, Point(XY, Z3R, (iso(1), iso(1))))

    @pytest.mark.parametrize("name", list(FIXTURES))
    def test_equal_types_satisfy_the_same_pool_formulas(self, name):
        h = FIXTURES[name]
        pool = [u for u in pool_for(h) if free_variables(u) <= set(XY)]
        points = list(iter_points(XY, h))
        for p, q in itertools.combinations(points, 2):
            if types_equal(p, q):
                assert all(in_lker(u, p) == in_lker(u, q) for u in pool)
            # the pool is also accepted as a fast falsifier
            assert types_equal(p, q, pool) == types_equal(p, q)


class TestIsotypy:
    def test_same_algebra(self):
        for h in FIXTURES.values():
            assert are_isotypic(h, h, max_arity=2).isotypic

    def test_z2_vs_z3(self):
        verdict = are_isotypic(Z2, Z3)
        assert verdict.verdict == "distinguished"
        p, u = verdict.witness_point, verdict.witness_formula
        other = Z2 if p.algebra is Z3 else Z3
        assert p in val(u, p.variables, p.algebra)
        assert val(u, p.variables, other).is_empty
        assert "verdict: distinguished" in verdict.report()

    def test_relabeled_copy(self):
        verdict = are_isotypic(Z3, Z3R)
        assert verdict.isotypic and verdict.verdict == "isotypic_up_to(3)"

    def test_errors(self):
        with pytest.raises(SignatureMismatch):
            are_isotypic(Z2, L2)
        with pytest.raises(ValueError):
            are_isotypic(Z2, Z3, max_arity=0)

    def test_isotypy_implies_local_isomorphism(self):
        library = list(FIXTURES.values()) + [Z3R, direct_power(Z3, 2)]
        for h1, h2 in itertools.combinations(library, 2):
            if h1.signature != h2.signature:
                continue
            if are_isotypic(h1, h2, max_arity=2).isotypic:
                assert locally_isomorphic(h1, h2).holds

    def test_homogeneous_and_isotypic_means_isomorphic(self):
        library = list(FIXTURES.values()) + [Z3R]
        for h in library:
            if not all(is_logically_homogeneous(h, ("x", "y", "z")[:k]).holds for k in (1, 2, 3)):
                continue
            for h2 in library:
                if h2.signature == h.signature and are_isotypic(h, h2).isotypic:
                    assert find_pair_isomorphism(h, (), h2, ()) is not None


class TestOrbitsAndHomogeneity:
    @pytest.mark.parametrize("name, k, count", [("Z2", 1, 2), ("Z3", 1, 2), ("Z3", 2, 5)])
    def test_orbit_counts(self, name, k, count):
        assert len(orbit_decomposition(FIXTURES[name], ("x", "y")[:k])) == count

    @pytest.mark.parametrize("name", list(FIXTURES))
    def test_orbits_match_brute_force(self, name):
        h = FIXTURES[name]
        orbits = orbit_decomposition(h, XY)
        expected = sorted(sorted(point_index(v, h.size) for v in o) for o in brute_orbits(h, 2))
        assert sorted(o.indices() for o in orbits) == expected

    def test_z3_orbits_on_one_variable(self):
        assert [o.indices() for o in orbit_decomposition(Z3, ("x",))] == [[0], [1, 2]]

    @pytest.mark.parametrize("name", list(FIXTURES))
    def test_homogeneous(self, name):
        for xs in (("x",), XY):
            report = is_logically_homogeneous(FIXTURES[name], xs)
            assert report.holds and report.counterexample is None

    def test_conjugators_recorded(self):
        report = is_logically_homogeneous(Z3, ("x",))
        assert [(p.values, q.values, s.map) for p, q, s in report.conjugators] == [((1,), (2,), (0, 2, 1))]

    @pytest.mark.parametrize("name, atoms", [("Z2", [[0], [1]]), ("Z3", [[0], [1, 2]]), ("L2", [[0], [1]])])
    def test_saturation(self, name, atoms):
        report = is_lg_saturated(FIXTURES[name], ("x",))
        assert report.holds
        assert [a.indices() for a, _ in report.certificates] == atoms
        for atom, p in report.certificates:
            assert p in atom


class TestLocalIsomorphism:
    def test_same_algebra(self):
        assert locally_isomorphic(Z3, Z3).holds

    def test_z2_vs_z3(self):
        report = locally_isomorphic(Z2, Z3)
        assert not report.holds and not report.forward

    def test_z3_into_its_square(self):
        report = locally_isomorphic(Z3, direct_power(Z3, 2))
        assert report.forward and not report.backward

    def test_z2_inside_its_square(self):
        report = locally_isomorphic(Z2, Z2SQ)
        assert report.forward and not report.backward
        assert "verdict: not_locally_isomorphic" in report.report()


def test_constants_in_the_criterion_substitution():
    u = f("exists _y1. add(_y1, _y1) = x")
    p = Point(("x",), Z3, (1,))
    assert type_criterion_check(u, p, {"_y1": App("e")}) == in_type(u, p)
