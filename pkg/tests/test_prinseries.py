from fractions import Fraction as F

import pytest

from artifact.exactalg import Laurent
from artifact.hecke import HeckeElement, T, e, theta, value_at_identity
from artifact.padic import LevelFunction
from artifact.prinseries import (
    ConvergenceRegion,
    NonInvertibleAtPoint,
    PrincipalSeriesError,
    act,
    action_oracle,
    det2,
    identity,
    interpolate_intertwiner,
    intertwiner,
    intertwiner_at,
    intertwiner_oracle,
    kappa,
    mat_eq,
    mat_evaluate,
    mat_mul,
    mat_scale,
    mat_sub,
    pi_matrix,
    plancherel_check,
    plancherel_rhs,
    rf,
    sigma_chi,
    spherical_projection,
    trace,
    x_nu,
    x_spherical,
    x_zero,
)
from artifact.rootdata import RootDatum

SL2 = RootDatum.preset("SL2")
q = Laurent.q()
Z_SAMPLES = [F(1, 5), F(1, 7), F(-1, 4), F(2, 9), F(1, 11)]


def generators():
    return [T(SL2.s(0)), T(SL2.s(1))]


def test_unit_acts_as_identity():
    for slot in ("i", "i-"):
        assert mat_eq(act(HeckeElement.unit(SL2), slot), identity(2))


def test_reflection_trace_and_determinant():
    m = act(T(SL2.s(1)))
    assert trace(m) == rf(q - 1)
    assert det2(m) == rf(-q)


def test_theta_eigenvalues_on_cyclic_line():
    # unnormalized theta acts on the cyclic vector by (q z)^lam; the other eigenvalue is its W-conjugate
    z = Laurent.z()
    for lam in (-2, 1, 3):
        m = act(theta(SL2, (lam,)))
        for ev in ((q * z) ** lam, (q / z) ** lam):
            assert not det2(mat_sub(m, mat_scale(rf(ev), identity(2))))


@pytest.mark.parametrize("slot", ["i", "i-"])
def test_quadratic_relation_for_generators(slot):
    for g in generators():
        m = act(g, slot)
        lhs = mat_mul(m, m)
        rhs = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(mat_scale(rf(q - 1), m), mat_scale(rf(q), identity(2)))]
        assert mat_eq(lhs, rhs)


def test_theta_matrices_commute_and_multiply():
    for a in range(-2, 3):
        for b in range(-2, 3):
            ma, mb = act(theta(SL2, (a,))), act(theta(SL2, (b,)))
            assert mat_eq(mat_mul(ma, mb), mat_mul(mb, ma))
            assert mat_eq(mat_mul(ma, mb), act(theta(SL2, (a + b,))))


@pytest.mark.parametrize("z", Z_SAMPLES[:3])
def test_action_matches_coset_oracle(z):
    for w in SL2.elements_up_to_length(2):
        for slot in ("i", "i-"):
            assert action_oracle(w, slot, 3, z) == mat_evaluate(act(T(w), slot), 3, z)


def test_pi_is_rank_one_projection():
    pi = pi_matrix()
    assert pi[0][0] == rf(1) and not pi[0][1] and not pi[1][0] and not pi[1][1]
    assert mat_eq(mat_mul(pi, pi), pi)
    assert not det2(pi)


def test_intertwining_property():
    r = intertwiner()
    for g in generators():
        assert mat_eq(mat_mul(r, act(g, "i")), mat_mul(act(g, "i-"), r))
    assert det2(r)


def test_intertwiner_singular_point():
    with pytest.raises(NonInvertibleAtPoint):
        intertwiner_at(F(1), 3)


@pytest.mark.parametrize("z", Z_SAMPLES[:4])
def test_intertwiner_matches_unipotent_integral(z):
    exact = intertwiner_at(z, 3)
    coarse, fine = intertwiner_oracle(3, z, 4), intertwiner_oracle(3, z, 8)
    for i in range(2):
        for j in range(2):
            err_fine = abs(fine[i][j] - exact[i][j])
            assert err_fine <= abs(coarse[i][j] - exact[i][j])
            assert err_fine < F(1, 1000)


def test_interpolated_intertwiner_reproduces_exact_entries():
    samples = [F(1, 4), F(1, 5), F(1, 7), F(1, 9)]
    coeffs = interpolate_intertwiner(3, samples, depth=10)
    z = F(1, 6)
    exact = intertwiner_at(z, 3)
    for i in range(2):
        for j in range(2):
            fitted = sum(c * float(z) ** k for k, c in enumerate(coeffs[i][j]))
            assert fitted == pytest.approx(float((1 - z) * exact[i][j]), abs=1e-3)


# sigma_chi

def test_sigma_of_iwahori_x0_is_pi_with_constant_volume():
    constants = set()
    for z in Z_SAMPLES:
        s = sigma_chi(x_zero(3), z, 3)
        assert s[0][1] == s[1][0] == s[1][1] == 0
        constants.add(s[0][0])
    assert constants == {F(1, 4)}


def test_sigma_of_spherical_orbit_is_chi_independent_rank_one():
    expected = mat_evaluate(spherical_projection(), 3, F(1, 5))
    for z in Z_SAMPLES:
        s = sigma_chi(x_spherical(3), z, 3)
        assert s[0][0] * s[1][1] - s[0][1] * s[1][0] == 0
        assert s == expected


def test_sigma_of_zero_function():
    assert sigma_chi(LevelFunction.zero(3, 4), F(1, 5), 3) == [[0, 0], [0, 0]]


@pytest.mark.parametrize("nu", range(-2, 3))
def test_sigma_of_x_nu_is_theta_times_pi(nu):
    for z in Z_SAMPLES[:3]:
        s = sigma_chi(x_nu(nu, 3), z, 3)
        expected = mat_evaluate(mat_mul(act(theta(SL2, (nu,)), "i-"), pi_matrix()), 3, z)
        assert s == [[x / 4 for x in row] for row in expected]


def test_sigma_outside_convergence_region():
    # at |z q| >= 1 the orbit sums do not terminate inside the window
    with pytest.raises(ConvergenceRegion):
        sigma_chi(lambda x: 1, F(1, 5), 3, window=3)


# Plancherel

def test_calibration_constant():
    assert kappa().to_q_string() == "1 + q^-1"


def test_plancherel_examples():
    assert not plancherel_rhs(e(SL2, (1,)))
    _, rhs, ok = plancherel_check(theta(SL2, (-1,)))
    assert ok
    assert rhs * rf(q * q) == rf((q + 1) * (q - 1) ** 2)


@pytest.mark.parametrize("nu", range(-3, 4))
def test_plancherel_identity(nu):
    h = theta(SL2, (nu,))
    lhs, rhs, ok = plancherel_check(h)
    assert ok
    for qq in (2, 3):
        assert lhs.at_q(qq) == rhs.at_q(qq)
    assert plancherel_rhs(h, order=6) == plancherel_rhs(h)


def test_plancherel_on_t_basis():
    for w in SL2.elements_up_to_length(3):
        assert plancherel_check(T(w))[2]
        assert value_at_identity(T(w)) == (q + 1 if w == SL2.identity() else Laurent())


def test_pgl2_is_out_of_scope():
    with pytest.raises(PrincipalSeriesError):
        act(HeckeElement.unit(RootDatum.preset("PGL2")))
