from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.exactalg import (
    Cone,
    ConeMismatch,
    ConeSeries,
    InsufficientOrder,
    Laurent,
    NotExpandable,
    RationalFunction,
    const_term,
    cone_expand,
    partial_const_term,
)

z = Laurent.z()
q = Laurent.q()

laurents = st.dictionaries(
    st.tuples(st.integers(-3, 3), st.integers(-2, 2)),
    st.fractions(min_value=-5, max_value=5, max_denominator=4),
    max_size=4,
).map(Laurent)


def series_terms(s: ConeSeries) -> dict:
    return {e: c.to_q_string() for e, c in s.coeffs.items()}


# cone expansion examples

def test_geometric_series_positive_cone():
    s = cone_expand(1 / (1 - z), Cone.positive(), 3)
    assert series_terms(s) == {(0,): "1", (1,): "1", (2,): "1", (3,): "1"}


def test_geometric_series_negative_cone():
    s = cone_expand(1 / (1 - z), Cone.negative(), 3)
    assert series_terms(s) == {(-1,): "-1", (-2,): "-1", (-3,): "-1"}


def test_shifted_geometric_series_in_q():
    s = cone_expand(z ** 2 / (1 - Laurent.q(-1) * z), Cone.positive(), 4)
    assert series_terms(s) == {(2,): "1", (3,): "q^-1", (4,): "q^-2"}


def test_non_monomial_leading_part_is_not_expandable():
    with pytest.raises(NotExpandable):
        cone_expand(1 / (Laurent.z(1) - Laurent.z(2)), Cone.positive(2), 3)


def test_mixing_cones_is_rejected():
    pos = cone_expand(1 / (1 - z), Cone.positive(), 3)
    neg = cone_expand(1 / (1 - z), Cone.negative(), 3)
    with pytest.raises(ConeMismatch):
        pos * neg


# constant term

def test_const_term_of_geometric_series():
    assert const_term(cone_expand(1 / (1 - z), Cone.positive(), 5)) == RationalFunction.coerce(1)


def test_const_term_without_zero_exponent():
    s = cone_expand(z ** 2 + Laurent.q(-1) * z ** 3, Cone.positive(), 4)
    assert const_term(s) == RationalFunction.coerce(0)


def test_const_term_requires_order_covering_zero():
    with pytest.raises(InsufficientOrder):
        const_term(cone_expand(1 / (1 - z), Cone.positive(), -1))


def test_annulus_constant_term_matches_double_geometric_sum():
    # a and b become extra variables; the cone makes a*z and b/z both small.
    zz, a, b = Laurent.z(1), Laurent.z(2), Laurent.z(3)
    cone = Cone([(1, 1, 0), (-1, 0, 1), (1, 0, 0)])
    order = 10
    series = cone_expand(1 / ((1 - a * zz) * (1 - b / zz)), cone, order)
    ct = partial_const_term(series, [1])
    # oracle: sum over n of (ab)^n, cut at the same cone degree (ab has degree 2)
    oracle = ConeSeries(cone, {(0, n, n): 1 for n in range(order // 2 + 1)}, order)
    assert ct.agrees_with(oracle)
    assert ct.agrees_with(cone_expand(1 / (1 - a * b), cone, order))


# serialization

def test_text_form_is_stable():
    x = 3 * Laurent.v(2) * Laurent.z(1, -1) + Laurent.z(1)
    assert str(x) == "3*v^2*z1^-1 + z1"
    assert (q - 1).to_q_string() == "q - 1"


def test_q_is_v_squared():
    assert q == Laurent.v(2)
    assert q.at_q(3) == 3
    with pytest.raises(ValueError):
        Laurent.v(1).at_q(4)


# invariants

@settings(max_examples=500, deadline=None)
@given(laurents, laurents, laurents)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + Laurent() == a
    assert a * Laurent.const(1) == a
    assert a - a == Laurent()


@settings(max_examples=40, deadline=None)
@given(st.integers(-2, 2), st.fractions(-3, 3, max_denominator=3), st.fractions(-3, 3, max_denominator=3))
def test_expansion_is_multiplicative(shift, c1, c2):
    f = z ** shift / (1 - c1 * z)
    g = 1 / (1 - c2 * Laurent.q(-1) * z)
    cone, order = Cone.positive(), 6
    lhs = cone_expand(f, cone, order) * cone_expand(g, cone, order)
    assert lhs.truncate(order).agrees_with(cone_expand(f * g, cone, order))


@settings(max_examples=40, deadline=None)
@given(st.fractions(-3, 3, max_denominator=3), st.fractions(-3, 3, max_denominator=3), st.integers(0, 2))
def test_const_term_linear_and_stable(c1, c2, k):
    f = z ** (-k) / (1 - c1 * z)
    g = Laurent.q(-1) / (1 - c2 * q * z)
    cone = Cone.positive()
    base = const_term(cone_expand(f + g, cone, 4))
    assert base == const_term(cone_expand(f, cone, 4)) + const_term(cone_expand(g, cone, 4))
    assert base == const_term(cone_expand(f + g, cone, 9))


def test_rational_function_equality_by_cross_multiplication():
    lhs = RationalFunction.coerce((1 - z ** 2) / (1 - z))
    assert lhs == RationalFunction.coerce(1 + z)
    assert RationalFunction.coerce(1 / (1 - z)) != RationalFunction.coerce(1 / (1 + z))
    assert RationalFunction.coerce(q / q).at_q(Fraction(5)) == 1
