import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from artifact.rootdata import RootDataError, RootDatum, coweight_interval, parse_coweight

SL2 = RootDatum.preset("SL2")
PGL2 = RootDatum.preset("PGL2")


def words_up_to(datum, n, extra=()):
    """All products of affine simple reflections of length <= n, times optional extra factors."""
    gens = datum.affine_simple_reflections
    found = {}
    for k in range(n + 1):
        for word in product(range(len(gens)), repeat=k):
            x = datum.identity()
            for i in word:
                x = x * gens[i]
            for om in (datum.identity(),) + tuple(extra):
                found.setdefault(x * om, (k, word))
    return found


def test_presets_reproduce_a1_data():
    assert SL2.cartan == ((2,),)
    assert PGL2.cartan == ((2,),)
    assert SL2.simple_coroots == ((1,),)
    assert PGL2.simple_coroots == ((2,),)


def test_unknown_preset():
    with pytest.raises(RootDataError):
        RootDatum.preset("G2x")


@pytest.mark.parametrize(
    "datum, lam, expected",
    [(SL2, (1,), True), (SL2, (-1,), False), (PGL2, (1,), True), (PGL2, (0,), True)],
)
def test_is_dominant(datum, lam, expected):
    assert datum.is_dominant(lam) is expected


@pytest.mark.parametrize(
    "datum, lam, mu, expected",
    [
        (SL2, (1,), (2,), True),
        (PGL2, (0,), (1,), False),
        (SL2, (-1,), (1,), True),
        (SL2, (2,), (1,), False),
        (PGL2, (0,), (2,), True),
    ],
)
def test_dominance_leq(datum, lam, mu, expected):
    assert datum.dominance_leq(lam, mu) is expected


def test_translation_by_zero_is_identity():
    t = SL2.translation_element((0,))
    assert t == SL2.identity()
    assert t.length() == 0


def test_sl2_coroot_translation_found_among_short_words():
    t = SL2.translation_element((1,))
    words = words_up_to(SL2, 2)
    assert t in words
    assert words[t][0] == 2 == t.length()


def test_pgl2_fundamental_translation_needs_length_zero_factor():
    t = PGL2.translation_element((1,))
    omegas = [o for o in PGL2.length_zero_elements if o != PGL2.identity()]
    assert len(omegas) == 1
    plain = words_up_to(PGL2, 3)
    assert t not in plain
    extended = words_up_to(PGL2, 1, extra=omegas)
    assert extended[t][0] == 1 == t.length()


@pytest.mark.parametrize(
    "datum, eta, mu, expected",
    [
        (SL2, (0,), (1,), True),
        (SL2, (2,), (1,), False),
        (PGL2, (1,), (1,), True),
        (PGL2, (0,), (1,), False),
        (PGL2, (-1,), (1,), True),
    ],
)
def test_conv_hull_member(datum, eta, mu, expected):
    assert datum.conv_hull_member(eta, mu) is expected


@pytest.mark.parametrize("datum", [SL2, PGL2])
def test_length_additive_on_dominant_grid(datum):
    for a in range(6):
        for b in range(6):
            ta, tb = datum.translation((a,)), datum.translation((b,))
            assert (ta * tb).length() == ta.length() + tb.length()
            assert ta * tb == datum.translation_element((a + b,))


@pytest.mark.parametrize("datum", [SL2, PGL2])
def test_closed_form_length_matches_word_search(datum):
    lengths = datum.word_lengths(4)
    for x, ell in lengths.items():
        assert x.length() == ell
        word, om = x.reduced_word(check=False)
        assert len(word) == ell
        rebuilt = datum.identity()
        for i in word:
            rebuilt = rebuilt * datum.s(i)
        assert rebuilt * om == x


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=3, max_size=3), st.sampled_from([SL2, PGL2]))
def test_dominance_is_a_partial_order(values, datum):
    a, b, c = ((x,) for x in values)
    assert datum.dominance_leq(a, a)
    if datum.dominance_leq(a, b) and datum.dominance_leq(b, a):
        assert a == b
    if datum.dominance_leq(a, b) and datum.dominance_leq(b, c):
        assert datum.dominance_leq(a, c)


def test_random_words_compare_equal_across_presentations():
    rng = random.Random(3)
    for _ in range(50):
        word = [rng.randrange(2) for _ in range(rng.randrange(7))]
        x = SL2.identity()
        for i in word:
            x = x * SL2.s(i)
        reduced, om = x.reduced_word()
        y = SL2.identity()
        for i in reduced:
            y = y * SL2.s(i)
        assert y * om == x


def test_coweight_helpers():
    assert parse_coweight("-2", SL2) == (-2,)
    with pytest.raises(RootDataError):
        parse_coweight("1 2", SL2)
    assert coweight_interval(SL2, -1, 1) == [(-1,), (0,), (1,)]
