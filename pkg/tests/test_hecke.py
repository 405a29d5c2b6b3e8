import pytest
from hypothesis import given, settings, strategies as st

from artifact.cosets import hecke_at_q, hecke_convolution_oracle
from artifact.exactalg import Laurent
from artifact.hecke import (
    HeckeElement,
    NotDominant,
    T,
    basis_inverse,
    bernstein_normal_form,
    bstar_bound,
    bstar_support,
    e,
    from_normal_form,
    mul,
    theta,
    theta_from,
    value_at_identity,
)
from artifact.rootdata import RootDatum

SL2 = RootDatum.preset("SL2")
PGL2 = RootDatum.preset("PGL2")
q = Laurent.q()
one = HeckeElement.unit(SL2)
s0, s1 = SL2.s(0), SL2.s(1)


def test_unit_times_reflection():
    assert mul(one, T(s1)) == T(s1)


def test_quadratic_relation():
    assert mul(T(s1), T(s1)) == T(s1).scale(q - 1) + one.scale(q)
    assert mul(T(s0), T(s0)) == T(s0).scale(q - 1) + one.scale(q)


def test_quadratic_relation_agrees_with_coset_count_at_three():
    assert hecke_at_q(hecke_convolution_oracle(s1, s1, 3), 3) == hecke_at_q(mul(T(s1), T(s1)), 3)
    assert hecke_at_q(mul(T(s1), T(s1)), 3) == {s1: 2, SL2.identity(): 3}


def test_length_additive_product():
    assert mul(T(s1), T(s0)) == T(s1 * s0)


def test_basis_inverse():
    for w in (s0, s1, s1 * s0, s0 * s1 * s0):
        assert mul(T(w), basis_inverse(w)) == one


def test_e_of_zero_is_unit():
    assert e(SL2, (0,)) == one


def test_e_rejects_non_dominant():
    with pytest.raises(NotDominant):
        e(SL2, (-1,))


def test_e_coroot_has_length_two_and_matches_oracle():
    x = e(SL2, (1,))
    (w, c), = x.terms.items()
    assert w.length() == 2 and c == Laurent.const(1)
    word, _ = w.reduced_word()
    a, b = (SL2.s(i) for i in word)
    assert hecke_at_q(hecke_convolution_oracle(a, b, 3), 3) == {w: 1}


def test_theta_examples():
    assert theta(SL2, (0,)) == one
    assert mul(theta(SL2, (1,)), theta(SL2, (-1,))) == one
    qi = Laurent.q(-1)
    assert theta(SL2, (-1,)).coefficient(SL2.identity()) == (1 - qi) ** 2


def test_value_at_identity_examples():
    assert value_at_identity(one) == q + 1
    assert value_at_identity(T(s1)) == Laurent()
    lhs = value_at_identity(theta(SL2, (-1,)))
    assert lhs * q * q == (q + 1) * (q - 1) ** 2


def test_bstar_support_examples():
    # nu = 0 contributes theta_0 = T_e itself; every positive nu has l(t_nu) > 0
    assert bstar_support(one, [(k,) for k in range(6)]) == {(0,)}
    assert bstar_support(one, [(k,) for k in range(1, 6)]) == set()
    assert bstar_support(T(s1), [(k,) for k in range(1, 6)]) == set()
    neg = [(-k,) for k in range(1, 4)]
    assert bstar_support(one, neg) == set(neg)
    # alternating-sum closed form (1 - x)(1 - x^{2a})/(1 + x), x = 1/q; equals (1 - x)^2 only at a = 1
    x = Laurent.q(-1)
    for a in range(1, 4):
        coeff = theta(SL2, (-a,)).coefficient(SL2.identity())
        assert coeff * (1 + x) == (1 - x) * (1 - x ** (2 * a))


def test_normal_form_examples():
    assert bernstein_normal_form(one) == {((0,), SL2.identity().finite): Laurent.const(1)}
    assert bernstein_normal_form(e(SL2, (1,))) == {((1,), SL2.identity().finite): Laurent.const(1)}
    form = bernstein_normal_form(T(s0))
    assert {lam for lam, _ in form} == {(0,), (-1,)}
    assert from_normal_form(SL2, form) == T(s0)


# invariants

lattice = st.integers(-3, 3)


@pytest.mark.parametrize("datum", [SL2, PGL2])
def test_theta_multiplicative_grid(datum):
    for a in range(-3, 4):
        for b in range(-3, 4):
            assert mul(theta(datum, (a,)), theta(datum, (b,))) == theta(datum, (a + b,))


@pytest.mark.parametrize("datum", [SL2, PGL2])
def test_theta_of_dominant_is_e(datum):
    for nu in range(6):
        assert theta(datum, (nu,)) == e(datum, (nu,))


@pytest.mark.parametrize("lam", range(-3, 4))
def test_theta_independent_of_decomposition(lam):
    reference = theta(SL2, (lam,))
    start = max(0, -lam)
    for nu in range(start, start + 3):
        assert theta_from(SL2, (lam + nu,), (nu,)) == reference


def test_e_multiplicative():
    for a in range(4):
        for b in range(4):
            assert mul(e(SL2, (a,)), e(SL2, (b,))) == e(SL2, (a + b,))


@pytest.mark.parametrize("datum", [SL2, PGL2])
def test_normal_form_round_trip(datum):
    for w in datum.elements_up_to_length(3):
        h = T(w)
        for side in ("left", "right"):
            assert from_normal_form(datum, bernstein_normal_form(h, side=side), side=side) == h


def test_bstar_support_vanishes_above_bound():
    for w in SL2.elements_up_to_length(4):
        h = T(w)
        bound = bstar_bound(h)
        assert bstar_support(h, [(k,) for k in range(bound, bound + 4)]) == set()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from([0, 1]), max_size=4), st.lists(st.sampled_from([0, 1]), max_size=4), st.lists(st.sampled_from([0, 1]), max_size=3))
def test_multiplication_associative(w1, w2, w3):
    def word(ix):
        x = one
        for i in ix:
            x = mul(x, T(SL2.s(i)))
        return x

    a, b, c = word(w1), word(w2), word(w3)
    assert mul(mul(a, b), c) == mul(a, mul(b, c))


def test_text_and_json_export():
    h = theta(SL2, (-1,))
    assert "T[e]" in str(h)
    assert h.to_json()["e"] == "1 - 2*q^-1 + q^-2"
