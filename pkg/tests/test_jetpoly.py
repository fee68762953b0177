from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdjet.jetpoly import (
    DepVar,
    JetPolynomial,
    JetVar,
    MissingJetValue,
    MultiIndex,
    evaluate,
    format_poly,
    max_order,
    multi_indices,
    parse_jetvar,
    parse_poly,
    partial_wrt,
    total_derivative,
    var,
)

U = var(DepVar.PSI2R)
V = var(DepVar.A3, 0, 0, 1, 0)


def test_additive_inverse():
    assert (U + V) + (-U) == V


def test_coefficient_cancellation():
    p = U.scale(Fraction(2, 3)) * U.scale(Fraction(3, 2))
    assert p == U * U
    assert p.coefficient(U_jet := JetVar.of(DepVar.PSI2R), U_jet) == 1


def test_annihilator():
    assert (U * JetPolynomial()).is_zero()
    assert (U * 0).terms() == []


def test_total_derivative_single_variable():
    assert total_derivative(var(DepVar.PSI3R), 0) == var(DepVar.PSI3R, 1, 0, 0, 0)


def test_total_derivative_mixed_index():
    # A1_{,1100} = d^2 A1 / dx0 dx1
    assert total_derivative(var(DepVar.A1, 1, 0, 0, 0), 1) == var(DepVar.A1, 1, 1, 0, 0)


def test_leibniz_on_product():
    lhs = total_derivative(U * V, 2)
    rhs = total_derivative(U, 2) * V + U * total_derivative(V, 2)
    assert lhs == rhs
    assert lhs == var(DepVar.PSI2R, 0, 0, 1, 0) * V + U * var(DepVar.A3, 0, 0, 2, 0)


def test_total_derivative_of_square_and_constant():
    assert total_derivative(U * U, 1) == (U * var(DepVar.PSI2R, 0, 1, 0, 0)).scale(2)
    assert total_derivative(JetPolynomial.const(7), 3).is_zero()


def test_bad_direction():
    with pytest.raises(ValueError):
        total_derivative(U, 4)


def test_partial_examples():
    u = JetVar.of(DepVar.PSI2R)
    assert partial_wrt(U * U, u) == U.scale(2)
    a0, p3 = var(DepVar.A0), var(DepVar.PSI3R)
    assert partial_wrt(a0 * p3, JetVar.of(DepVar.PSI3R)) == a0
    assert partial_wrt(a0 * p3, JetVar.of(DepVar.PSI4I)).is_zero()


def test_evaluate_examples():
    u, v = JetVar.of(DepVar.PSI2R), JetVar.of(DepVar.A3, (0, 0, 1, 0))
    pt = {u: Fraction(2, 3), v: Fraction(4, 9)}
    assert evaluate(JetPolynomial(), pt) == 0
    assert evaluate(U * U - V, pt) == 0


def test_evaluate_missing():
    with pytest.raises(MissingJetValue) as info:
        evaluate(U + V, {JetVar.of(DepVar.PSI2R): Fraction(1)})
    assert info.value.var == JetVar.of(DepVar.A3, (0, 0, 1, 0))


def test_max_order():
    assert max_order(var(DepVar.PSI3R, 1, 0, 0, 0)) == 1
    assert max_order(JetPolynomial.const(3)) == 0
    with pytest.raises(ValueError):
        max_order(JetPolynomial())


def test_jetvar_ordering_is_order_then_rank_then_index():
    a = JetVar.of(DepVar.PSI1R, (0, 0, 0, 0))
    b = JetVar.of(DepVar.A0, (0, 0, 0, 1))
    c = JetVar.of(DepVar.A0, (1, 0, 0, 0))
    d = JetVar.of(DepVar.PSI4I, (0, 0, 0, 1))
    assert sorted([d, c, b, a]) == [a, b, c, d]


def test_multi_index_addition_and_listing():
    assert MultiIndex(1, 0, 2, 0) + MultiIndex(0, 1, 0, 3) == MultiIndex(1, 1, 2, 3)
    assert len(multi_indices(4)) == 35
    assert multi_indices(1) == [(0, 0, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0), (1, 0, 0, 0)]


def test_text_round_trip():
    p = (U * V).scale(Fraction(-2, 3)) + var(DepVar.A1, 0, 0, 0, 2).scale(5) + Fraction(1, 7)
    text = format_poly(p)
    assert "-2/3*" in text and "A1[(0,0,0,2)]" in text
    assert parse_poly(text) == p
    assert parse_poly(format_poly(JetPolynomial())).is_zero()
    assert parse_jetvar("psi2i[(0,0,1,3)]") == JetVar.of(DepVar.PSI2I, (0, 0, 1, 3))


# -- properties on random degree <= 2 polynomials ---------------------------------

jets = st.builds(
    JetVar.of,
    st.sampled_from(list(DepVar)),
    st.tuples(*[st.integers(0, 2)] * 4),
)
coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=9)
monomials = st.lists(jets, min_size=0, max_size=2).map(lambda m: tuple(sorted(m)))
polys = st.dictionaries(monomials, coeffs, max_size=6).map(JetPolynomial)
directions = st.integers(0, 3)


@settings(max_examples=200, deadline=None)
@given(polys, directions, directions)
def test_total_derivatives_commute(p, d, e):
    assert p.total_derivative(d).total_derivative(e) == p.total_derivative(e).total_derivative(d)


@settings(max_examples=200, deadline=None)
@given(polys, polys, directions)
def test_leibniz(p, q, d):
    assert (p * q).total_derivative(d) == p.total_derivative(d) * q + p * q.total_derivative(d)


@settings(max_examples=200, deadline=None)
@given(polys, directions)
def test_degree_preserved(p, d):
    assert p.total_derivative(d).degree() <= p.degree()


@settings(max_examples=200, deadline=None)
@given(polys, polys, st.data())
def test_evaluation_homomorphism(p, q, data):
    vs = sorted(p.variables() | q.variables())
    pt = {v: data.draw(coeffs) for v in vs}
    assert (p + q).evaluate(pt) == p.evaluate(pt) + q.evaluate(pt)
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)


@settings(max_examples=200, deadline=None)
@given(polys, polys, jets)
def test_partial_linear_and_product_rule(p, q, v):
    assert (p + q).partial(v) == p.partial(v) + q.partial(v)
    assert (p * q).partial(v) == p.partial(v) * q + p * q.partial(v)
    assert p.partial(v).degree() <= max(p.degree() - 1, 0)


@settings(max_examples=100, deadline=None)
@given(polys, st.data())
def test_substitute_then_evaluate(p, data):
    vs = sorted(p.variables())
    pt = {v: data.draw(coeffs) for v in vs}
    part = {v: x for k, (v, x) in enumerate(pt.items()) if k % 2}
    rest = {v: x for v, x in pt.items() if v not in part}
    assert p.substitute(part).evaluate(rest) == p.evaluate(pt)


@settings(max_examples=100, deadline=None)
@given(polys)
def test_text_round_trip_random(p):
    assert parse_poly(format_poly(p)) == p
