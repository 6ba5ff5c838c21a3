import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, L2, Z2, Z3, pool_for
from oracles import naive_val
from test_formulas import formulas
from test_terms import E, X, Y, add

from halmos.algebra import GROUP_SIGNATURE, automorphisms
from halmos.errors import HalmosError, ResourceError, SpaceMismatch
from halmos.formulas import Equality, Not, free_variables, parse_formula
from halmos.semantics import (PointSet, decode, deserialize, encode, equality_set, exists_q,
                              forall_q, in_lker, in_theory, is_admissible, parse_point, pullback,
                              semantically_equal, val)
from halmos.terms import App, Point, Substitution, Var, iter_points

G = GROUP_SIGNATURE
XY = ("x", "y")


def pts(h, xs, *values):
    return PointSet.from_points(xs, h, [Point(xs, h, v) for v in values])


class TestEncoding:
    def test_examples(self):
        assert encode(Point(("x1", "x2"), Z2, (1, 0))) == 1
        assert decode(0, XY, Z3).values == (0, 0)
        assert encode(Point(("x",), Z3, (2,))) == 2

    @pytest.mark.parametrize("name", list(FIXTURES))
    def test_inverse(self, name):
        h = FIXTURES[name]
        for i, p in enumerate(iter_points(XY, h)):
            assert encode(p) == i and decode(i, XY, h) == p

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            decode(9, XY, Z2)


class TestEqualitySets:
    def test_examples(self):
        assert equality_set(X, X, ("x",), Z3).is_full
        assert equality_set(add(X, X), E, ("x",), Z3) == pts(Z3, ("x",), (0,))
        assert equality_set(add(X, X), E, ("x",), Z2).is_full

    def test_boolean(self):
        a = equality_set(X, E, ("x",), Z3)
        assert (a & ~a).is_empty and (a | ~a).is_full
        both = equality_set(X, E, ("x",), Z2) & equality_set(X, add(E, E), ("x",), Z2)
        assert both == pts(Z2, ("x",), (0,))

    def test_space_mismatch(self):
        with pytest.raises(SpaceMismatch):
            PointSet.full(("x",), Z2) & PointSet.full(("y",), Z2)
        with pytest.raises(SpaceMismatch):
            PointSet.full(("x",), Z2) | PointSet.full(("x",), L2)


class TestQuantifiers:
    def test_examples(self):
        assert exists_q(PointSet.empty(XY, Z2), "x").is_empty
        assert exists_q(pts(Z2, XY, (0, 1)), "x") == pts(Z2, XY, (0, 1), (1, 1))
        assert exists_q(PointSet.full(XY, Z2), "x").is_full
        assert forall_q(PointSet.full(XY, Z2), "x").is_full
        assert forall_q(pts(Z2, XY, (0, 1), (1, 1)), "x") == pts(Z2, XY, (0, 1), (1, 1))
        assert forall_q(PointSet.empty(XY, Z2), "x").is_empty

    def test_unknown_variable(self):
        with pytest.raises(HalmosError):
            exists_q(PointSet.full(XY, Z2), "z")
        with pytest.raises(HalmosError):
            forall_q(PointSet.full(XY, Z2), "z")

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2 ** 27 - 1), st.integers(0, 2 ** 27 - 1), st.sampled_from("xyz"))
    def test_laws_on_z3_cube(self, a, b, v):
        xs = ("x", "y", "z")
        A, B = PointSet(xs, Z3, a), PointSet(xs, Z3, b)
        assert A <= exists_q(A, v) and forall_q(A, v) <= A
        assert exists_q(A & exists_q(B, v), v) == exists_q(A, v) & exists_q(B, v)
        assert ~exists_q(A, v) == forall_q(~A, v)
        assert exists_q(exists_q(A, "x"), "z") == exists_q(exists_q(A, "z"), "x")


class TestPullback:
    def test_examples(self):
        a = PointSet(XY, Z3, 0b101100111)
        assert pullback(Substitution.identity(XY), a) == a
        s = Substitution.from_mapping({"y": add(X, X)}, ("x",))
        assert pullback(s, equality_set(Y, E, ("y",), Z3)) == pts(Z3, ("x",), (0,))
        s = Substitution(("x1", "x2"), ("x",), (X, X))
        assert pullback(s, equality_set(Var("x1"), Var("x2"), ("x1", "x2"), Z3)).is_full

    def test_against_point_composition(self):
        s = Substitution(XY, XY, (add(X, Y), Y))
        a = PointSet(XY, Z3, 0b110010011)
        back = pullback(s, a)
        for p in iter_points(XY, Z3):
            q = Point(XY, Z3, ((p.values[0] + p.values[1]) % 3, p.values[1]))
            assert (p in back) == (q in a)


class TestVal:
    def test_examples(self):
        assert val(parse_formula("x = x"), ("x",), Z3).is_full
        assert val(parse_formula("exists y. add(y,y) = x", G), ("x",), Z3).is_full
        assert val(parse_formula("!(x = e)", G), ("x",), Z2) == pts(Z2, ("x",), (1,))

    def test_free_variable_outside_space(self):
        with pytest.raises(HalmosError):
            val(Equality(X, Y), ("x",), Z2)

    def test_shadowing_of_a_space_variable(self):
        # the inner x is bound; the outer one is the coordinate
        u = parse_formula("x = e & (exists x. add(x, x) = y)", G)
        assert set(val(u, XY, Z3).indices()) == naive_val(u, XY, Z3)

    def test_budget(self):
        with pytest.raises(ResourceError):
            val(parse_formula("x = x"), XY, Z3, budget=8)

    @settings(max_examples=300, deadline=None)
    @given(formulas("xy"), st.sampled_from(["Z2", "Z3", "Z2^2"]))
    def test_against_naive_evaluator(self, u, name):
        h = FIXTURES[name]
        assert set(val(u, XY, h).indices()) == naive_val(u, XY, h)

    @pytest.mark.parametrize("name", list(FIXTURES))
    def test_automorphism_invariance(self, name):
        h = FIXTURES[name]
        for u in pool_for(h):
            a = val(u, XY, h)
            for sigma in automorphisms(h):
                moved = {encode(Point(XY, h, tuple(sigma(v) for v in p.values))) for p in a}
                assert moved == set(a.indices())


class TestKernelsAndTheories:
    def test_in_lker_examples(self):
        assert in_lker(parse_formula("x = x"), Point(("x",), Z3, (1,)))
        assert not in_lker(parse_formula("x = e", G), Point(("x",), Z2, (1,)))
        assert in_lker(parse_formula("exists y. add(y,y) = x", G), Point(("x",), Z3, (1,)))

    def test_in_theory_examples(self):
        for h in FIXTURES.values():
            assert in_theory(parse_formula("x = x"), ("x",), h)
        assert in_theory(parse_formula("add(x,x) = e", G), ("x",), Z2)
        assert not in_theory(parse_formula("add(x,x) = e", G), ("x",), Z3)

    @pytest.mark.parametrize("name", list(FIXTURES))
    def test_theory_is_intersection_of_kernels(self, name):
        h = FIXTURES[name]
        for u in pool_for(h):
            if free_variables(u) <= set(XY):
                assert in_theory(u, XY, h) == all(in_lker(u, p) for p in iter_points(XY, h))

    def test_admissibility(self):
        assert is_admissible(X, X, Z3)
        assert not is_admissible(App("zero"), App("one"), L2)
        assert is_admissible(add(X, X), E, Z2)

    def test_semantic_equality(self):
        u = parse_formula("x = e", G)
        v = parse_formula("add(x,x) = e", G)
        assert semantically_equal(u, Not(Not(u)), [Z2, Z3])
        assert semantically_equal(parse_formula("!(exists x. x = y)"), parse_formula("forall x. !(x = y)"),
                                  [Z2, Z3, L2])
        # in Z3 only 0 doubles to 0; in Z2 every element does
        assert semantically_equal(u, v, [Z3])
        assert not semantically_equal(u, v, [Z2])


class TestSerialization:
    @pytest.mark.parametrize("name", list(FIXTURES))
    def test_round_trip(self, name):
        h = FIXTURES[name]
        for bits in (0, 1, 5, (1 << h.size ** 2) - 1):
            a = PointSet(XY, h, bits)
            assert deserialize(a.serialize(), h) == a

    def test_format(self):
        text = pts(Z3, ("x",), (1,), (2,)).serialize()
        assert text.splitlines()[0] == "pointset Z3 x"
        assert text.splitlines()[1] == "06"

    def test_parse_point(self):
        assert parse_point("x=1, y=0", XY, Z2).values == (1, 0)
        with pytest.raises(HalmosError):
            parse_point("x=1", XY, Z2)
