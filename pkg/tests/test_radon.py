import cmath
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from artifact.padic import LevelFunction, dilate, valuation
from artifact.radon import (
    NonContracting,
    RadonError,
    TorusGroupAlgebraElement,
    Unbounded,
    ZeroComponent,
    apply_factor,
    base_point,
    compact_support_radius,
    fourier,
    geom_inverse,
    geometric_sum,
    line_integral,
    mellin_gamma_check,
    pairing,
    pi_minus_inverse_q,
    projective_directions,
    radon,
    restrict_annulus,
    sigma_apply,
)

P = 3


def square(p=P, radius_val=0):
    return LevelFunction.indicator_ball(p, 2, radius_val)


def punctured_square(p=P):
    return square(p) - square(p, 1)


def random_plane(seed, p=P, M=1, N=1, density=0.3):
    return LevelFunction.random(random.Random(seed), p, 2, M, N, density=density)


def k_invariant(seed, p=P, depth=3):
    """Random function of min(v(x1), v(x2)) supported on p^-1 O^2 minus p^depth O^2."""
    rng = random.Random(seed)
    weights = {k: rng.choice([-2, -1, 1, 2, 3]) for k in range(-1, depth)}

    def f(x):
        if not any(x):
            return 0
        k = min(valuation(c, p) for c in x)
        return weights.get(k, 0)

    return LevelFunction.from_callable(p, 2, 1, depth, f)


def riemann_line(f, base, y, reach=6, fine=6):
    """Oracle for the integral of f(base + t y) dt: sum over t in p^-reach Z / p^fine."""
    p = f.p
    step = F(1, p ** reach)
    total = F(0)
    for j in range(p ** (reach + fine)):
        t = j * step
        total += f(tuple(F(b) + t * F(c) for b, c in zip(base, y)))
    return total * F(1, p ** fine)


def padic_frac(x, p):
    x = F(x)
    k = max(0, -valuation(x, p)) if x else 0
    if k == 0:
        return F(0)
    den = x.denominator // p ** k
    return F(x.numerator * pow(den, -1, p ** k) % p ** k, p ** k)


def fourier_oracle(f, y):
    total = 0j
    for a, val in f.values.items():
        x = f.cell_point(a)
        total += complex(val) * cmath.exp(2j * math.pi * float(padic_frac(pairing(x, y), f.p)))
    return total * float(f.cell_measure())


# line integrals

def test_line_integral_examples():
    assert line_integral(square(), (1, 0)) == 1
    for y in ((1, 0), (1, 2), (3, 1)):
        assert line_integral(punctured_square(), y) == 1 - F(1, P)


def test_line_integral_against_riemann_sum():
    f = random_plane(1, M=1, N=1)
    for y in ((1, 0), (1, 1), (F(1, 3), 2), (3, 1)):
        assert line_integral(f, y) == riemann_line(f, (0, 0), y, reach=3, fine=3)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_dilation_by_uniformizer_scales_line_integral(seed):
    f = random_plane(seed)
    g = dilate(f, P) - f.scale(F(1, P))
    for y in projective_directions(P, 2):
        assert line_integral(g, y) == 0


# Radon transform

def test_radon_examples():
    assert radon(square(), (0, 1)) == 1
    assert radon(square(), (0, F(1, 3))) == F(1, 3)


def test_base_point_pairs_to_one():
    for y in ((0, 1), (3, 1), (F(1, 9), 2), (5, 0)):
        assert pairing(base_point(y, P), y) == 1
    with pytest.raises(RadonError):
        base_point((0, 0), P)
    with pytest.raises(RadonError):
        radon(square(), (0, 1), x0=(0, 0))


def test_radon_independent_of_base_point():
    rng = random.Random(4)
    for seed in range(20):
        f = random_plane(seed)
        y = (F(rng.randrange(1, 9), 3), F(rng.randrange(9)))
        x0 = base_point(y, P)
        shift = F(rng.randrange(1, 30), rng.choice([1, 3, 9]))
        other = (x0[0] + shift * y[0], x0[1] + shift * y[1])
        assert radon(f, y, other) == radon(f, y)


def test_radon_against_riemann_sum():
    f = random_plane(7)
    for y in ((0, 1), (1, 1), (F(1, 3), 1)):
        assert radon(f, y) == riemann_line(f, base_point(y, P), y, reach=3, fine=3)


# Fourier transform

def test_fourier_examples():
    assert fourier(square()).equals(square().as_complex(), tol=1e-12)
    expected = LevelFunction.indicator_ball(P, 2, -1, value=F(1, 9)).as_complex()
    assert fourier(square(P, 1)).equals(expected, tol=1e-12)


def test_fourier_against_direct_character_sum():
    f = random_plane(3, M=1, N=1)
    phi = fourier(f)
    for y in ((0, 1), (F(1, 3), 0), (F(2, 3), F(1, 3)), (1, F(-1, 3)), (3, 0)):
        assert abs(phi(y) - fourier_oracle(f, y)) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([(1, 1), (0, 2), (2, 1)]))
def test_fourier_is_an_involution(seed, window):
    f = random_plane(seed, M=window[0], N=window[1])
    assert fourier(fourier(f)).equals(f.as_complex(), tol=1e-9)


# the sigma element and compact support

def test_sigma_examples():
    f = square()
    assert sigma_apply(TorusGroupAlgebraElement.point(1), f) == f
    assert sigma_apply(pi_minus_inverse_q(P), f) == square(P, 1) - f.scale(F(1, P))


def test_torus_algebra_product_acts_as_composition():
    a = TorusGroupAlgebraElement.factor(P, F(1, P))
    b = TorusGroupAlgebraElement.factor(F(1, P), 2)
    f = random_plane(5)
    assert sigma_apply(a * b, f) == sigma_apply(a, sigma_apply(b, f))


def test_compact_support_examples():
    sf = sigma_apply(pi_minus_inverse_q(P), punctured_square())
    report = compact_support_radius(sf)
    assert 0 < report.radius <= report.certified_bound
    with pytest.raises(Unbounded):
        compact_support_radius(punctured_square())
    assert compact_support_radius(LevelFunction.zero(P, 2)).radius == 0


def test_support_radius_matches_exhaustive_sampling():
    sf = sigma_apply(pi_minus_inverse_q(P), random_plane(11))
    assert compact_support_radius(sf).radius == compact_support_radius(sf, sample_digits=None).radius


def test_product_of_factors_keeps_compact_support():
    sigma = pi_minus_inverse_q(P) * TorusGroupAlgebraElement.factor(F(1, P), 2)
    report = compact_support_radius(sigma_apply(sigma, random_plane(12)))
    assert report.radius <= report.certified_bound


# geometric inversion

def test_geom_inverse_telescopes_on_unit_ball():
    f = LevelFunction.indicator_ball(P, 1, 0)
    g = geom_inverse(P, 1, f, depth=4)
    assert restrict_annulus(apply_factor(P, 1, g), 4) == restrict_annulus(f, 4)


def test_geometric_sum_on_unit_shell():
    # only the n = 0 term reaches |x| = 1
    g = geometric_sum(P, F(1, P), square(), depth=3)
    for x in ((1, 0), (0, 2), (1, 1), (4, 3)):
        assert g(x) == 1
    # shell |x| = 1/q sees n = 0 and n = 1: 1 + q
    assert g((3, 0)) == 1 + P


def test_geom_inverse_of_zero():
    zero = LevelFunction.zero(P, 2)
    assert not geom_inverse(P, 2, zero, depth=2)


def test_geom_inverse_requires_contraction():
    with pytest.raises(NonContracting):
        geom_inverse(1, 2, square(), depth=2)
    with pytest.raises(NonContracting):
        geom_inverse(F(1, P), 2, square(), depth=2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([F(1), F(2), F(-1), F(1, 3), F(3)]))
def test_geom_inverse_is_two_sided_inverse(seed, c):
    f = LevelFunction.random(random.Random(seed), P, 1, 0, 2)
    depth = 3
    g = geom_inverse(P, c, f, depth)
    assert restrict_annulus(apply_factor(P, c, g), depth) == restrict_annulus(f, depth)
    h = geom_inverse(P, c, apply_factor(P, c, f), depth)
    assert restrict_annulus(h, depth) == restrict_annulus(f, depth)


# gamma factors

def test_gamma_ratio_trivial_when_functions_agree():
    f = punctured_square()
    r1, r2 = mellin_gamma_check(f, f, 0, 0.7 + 0.2j)
    assert r1 == r2


@pytest.mark.parametrize("z", [0.5, 0.3 + 0.4j, -0.8, 2.0])
def test_gamma_ratio_is_test_function_independent_for_k_invariant(z):
    reference = punctured_square()
    ratios = []
    for seed in range(3):
        r1, r2 = mellin_gamma_check(reference, k_invariant(seed), 0, z)
        assert abs(r1 - r2) < 1e-9 * max(1.0, abs(r1))
        ratios.append(r2)
    assert max(abs(r - ratios[0]) for r in ratios) < 1e-9 * max(1.0, abs(ratios[0]))


@pytest.mark.parametrize("index", [0, 1])
def test_gamma_ratio_is_test_function_independent_for_random(index):
    functions = [random_plane(seed, density=0.5) for seed in (21, 22, 24)]
    for z in (0.5, 0.2 - 0.6j):
        ratios = [mellin_gamma_check(functions[0], g, index, z)[1] for g in functions]
        assert max(abs(r - ratios[0]) for r in ratios) < 1e-9 * max(1.0, abs(ratios[0]))


def test_gamma_depends_on_the_character():
    f = punctured_square()
    values = [mellin_gamma_check(f, f, 0, z)[0] for z in (0.5, 0.25, 2.0)]
    assert abs(values[0] - values[1]) > 1e-3 and abs(values[0] - values[2]) > 1e-3


def test_gamma_ratio_zero_component():
    # a K-invariant function has no component along a nontrivial unit character
    with pytest.raises(ZeroComponent):
        mellin_gamma_check(punctured_square(), punctured_square(), 1, 0.5)
    # an accidental simultaneous zero of both components at one z
    with pytest.raises(ZeroComponent):
        mellin_gamma_check(punctured_square(), random_plane(23, density=0.5), 0, 0.5)
