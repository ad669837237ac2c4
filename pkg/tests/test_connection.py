import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toric_gk import (GKParams, MomentPolytope, guillemin_potential, kappa_boulanger,
                      perturbed_potential, quadratic_potential)
from toric_gk.connection import (bismut_curvature, canonical_scalar_curvature, christoffel,
                                 connection_form_sigma, connection_form_sigma_direct,
                                 covariant_constancy_residuals, curvature_symmetry_residuals,
                                 epsilon_section_residual, integrability_residuals, torsion_h)
from toric_gk.frame import frame_jets

import oracles
from factories import random_config

ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])
# hand-checkable configuration: square Guillemin + 0.05 x^3 y
CUBIC = 0.05
C_REF = 0.3 * ROT
F_REF = 0.4 * ROT
MU_REF = np.array([0.3, 0.6])


@pytest.fixture(scope="module")
def ref_model():
    square = MomentPolytope.box([0, 0], [1, 1])
    return perturbed_potential(guillemin_potential(square), {(3, 1): CUBIC})


@pytest.fixture(scope="module")
def ref_params():
    return GKParams(C_REF, F_REF)


def hand_gram(mu):
    return oracles.gram_g_b(oracles.box_guillemin_hessian(mu, CUBIC), C_REF, F_REF)


def test_flat_case_vanishes():
    model = quadratic_potential(MomentPolytope.box([0, 0], [1, 1]))
    params = GKParams.zeros(2)
    mu = [0.4, 0.7]
    for flavor in ("levi_civita", "bismut_plus", "bismut_minus"):
        assert not np.any(christoffel(model, params, mu, flavor).gamma)
    assert not np.any(torsion_h(model, params, mu).H)
    assert not np.any(bismut_curvature(model, params, mu, +1))
    assert canonical_scalar_curvature(model, params, mu) == 0.0
    assert max(covariant_constancy_residuals(model, params, mu).values()) == 0.0


def test_flat_case_with_constant_params_is_flat():
    # constant metric and b: every Christoffel symbol and H vanish
    model = quadratic_potential(MomentPolytope.box([0, 0], [1, 1]))
    params = GKParams(0.5 * ROT, 0.7 * ROT)
    assert not np.any(christoffel(model, params, [0.4, 0.7], "bismut_plus").gamma)
    assert not np.any(torsion_h(model, params, [0.4, 0.7]).H)


def test_cp1_levi_civita_matches_fd_metric(cp1):
    def metric(mu):
        s = 0.5 / mu[0] + 0.5 / (1 - mu[0])
        return np.diag([1 / s, s])
    for x in (0.2, 0.5, 0.85):
        mu = np.array([x])
        gamma = christoffel(cp1, GKParams.zeros(1), mu).gamma
        np.testing.assert_allclose(gamma, oracles.levi_civita_fd(metric, mu), atol=1e-6)


def test_levi_civita_matches_fd_oracle(ref_model, ref_params):
    gamma = christoffel(ref_model, ref_params, MU_REF).gamma
    fd = oracles.levi_civita_fd(lambda m: hand_gram(m)[0], MU_REF)
    np.testing.assert_allclose(gamma, fd, atol=1e-8)
    np.testing.assert_allclose(gamma, np.swapaxes(gamma, 0, 1), atol=1e-15)


def test_torsion_matches_fd_oracle(ref_model, ref_params):
    H = torsion_h(ref_model, ref_params, MU_REF).H
    np.testing.assert_allclose(H, oracles.torsion_fd(lambda m: hand_gram(m)[1], MU_REF),
                               atol=1e-8)
    assert np.abs(H).max() > 1e-2


def test_torsion_theta_theta_block(ref_model, ref_params):
    # H(d theta_i, d theta_j, d mu_k) is the mu_k-derivative of the antisymmetric part of
    # phi^-1, read with the transposed index pair of the printed formula
    H = torsion_h(ref_model, ref_params, MU_REF).H
    jets = frame_jets(ref_model, ref_params, MU_REF)
    dP = jets["phi_inv"].d1                 # dP[k, a, b]
    dPa = 0.5 * (dP - np.swapaxes(dP, 1, 2))
    for k in range(2):
        np.testing.assert_allclose(H[:2, :2, 2 + k], -dPa[k].T, atol=1e-15)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_torsion_is_alternating(seed):
    model, params, mu = random_config(seed)
    H = torsion_h(model, params, mu).H
    np.testing.assert_array_equal(H, -np.swapaxes(H, 0, 1))
    np.testing.assert_array_equal(H, -np.swapaxes(H, 1, 2))


def test_torsion_is_closed(ref_model, ref_params):
    # dH = 0: alternate the FD derivative of the analytic H
    h = 1e-5

    def H_of(m):
        return torsion_h(ref_model, ref_params, m).H
    dH = oracles.chart_derivative(H_of, MU_REF, h)      # dH[a, b, c, m] = d_m H_abc
    alt = (np.einsum("abcm->mabc", dH) - np.einsum("abcm->ambc", dH)
           + np.einsum("abcm->abmc", dH) - dH)
    assert np.abs(alt).max() <= 1e-5


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_bismut_difference_is_torsion(seed):
    model, params, mu = random_config(seed)
    plus = christoffel(model, params, mu, "bismut_plus").gamma
    minus = christoffel(model, params, mu, "bismut_minus").gamma
    g = frame_jets(model, params, mu)["g"].val
    H = torsion_h(model, params, mu).H
    expected = np.einsum("ijl,lk->ijk", H, np.linalg.inv(g))
    assert np.abs(plus - minus - expected).max() <= 1e-12 * max(1.0, np.abs(expected).max())


def test_unknown_flavor(ref_model, ref_params):
    with pytest.raises(ValueError):
        christoffel(ref_model, ref_params, MU_REF, "weitzenbock")
    with pytest.raises(ValueError):
        bismut_curvature(ref_model, ref_params, MU_REF, sign=2)


def test_cp1_covariant_constancy(cp1):
    res = covariant_constancy_residuals(cp1, GKParams.zeros(1), [0.35])
    assert max(res.values()) <= 1e-6


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_covariant_constancy_random(seed):
    model, params, mu = random_config(seed)
    fd = covariant_constancy_residuals(model, params, mu, fd_step=1e-5)
    assert max(fd.values()) <= 1e-5
    assert fd["nabla_plus_g"] <= 1e-6 and fd["nabla_minus_g"] <= 1e-6
    exact = covariant_constancy_residuals(model, params, mu, fd_step=None)
    assert max(exact.values()) <= 1e-10


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_integrability(seed):
    model, params, mu = random_config(seed)
    res = integrability_residuals(model, params, mu)
    assert res["dc_sum"] <= 1e-4 and res["torsion_vs_dc"] <= 1e-4


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_curvature_symmetries(seed):
    model, params, mu = random_config(seed)
    fd = curvature_symmetry_residuals(model, params, mu, fd_step=1e-4)
    assert max(fd.values()) <= 1e-4
    exact = curvature_symmetry_residuals(model, params, mu, fd_step=None)
    assert exact["antisymmetry_xy"] <= 1e-10 and exact["antisymmetry_zw"] <= 1e-10
    assert max(exact.values()) <= 1e-10


def test_curvature_fd_matches_exact(ref_model, ref_params):
    for sign in (-1, 0, 1):
        fd = bismut_curvature(ref_model, ref_params, MU_REF, sign, fd_step=1e-4)
        exact = bismut_curvature(ref_model, ref_params, MU_REF, sign, fd_step=None)
        assert np.abs(fd - exact).max() <= 1e-6 * np.abs(exact).max()


def test_levi_civita_scalar_curvature_cp1(cp1):
    # Riemannian scalar curvature g^{jk} R^i_{ijk} of CP1 is 4
    mu = [0.3]
    R = bismut_curvature(cp1, GKParams.zeros(1), mu, 0, fd_step=None)
    g = frame_jets(cp1, GKParams.zeros(1), mu)["g"].val
    ginv = np.linalg.inv(g)
    # R[i, j, k, w] = g(R(d_i, d_j) d_k, d_w); Ric(j, k) = g^{iw} R[i, j, k, w]
    ric = np.einsum("ijkw,iw->jk", R, ginv)
    assert np.einsum("jk,jk->", ric, ginv) == pytest.approx(4.0, abs=1e-10)


def test_canonical_scalar_curvature_cp1(cp1):
    for x in (0.2, 0.5, 0.7):
        assert canonical_scalar_curvature(cp1, GKParams.zeros(1), [x]) == pytest.approx(4, abs=1e-3)
        exact = canonical_scalar_curvature(cp1, GKParams.zeros(1), [x], fd_step=None)
        assert exact == pytest.approx(4.0, abs=1e-10)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_canonical_scalar_curvature_kahler_reduction(seed):
    model, _, mu = random_config(seed)
    params = GKParams.zeros(2)
    kc = canonical_scalar_curvature(model, params, mu)
    assert kc == pytest.approx(kappa_boulanger(model, params, mu), abs=1e-3)


def test_sigma_closed_form_matches_christoffel_route():
    for seed, n in [(1, 2), (2, 2), (3, 3), (4, 3)]:
        model, params, mu = random_config(seed, n)
        closed = connection_form_sigma(model, params, mu)
        direct = connection_form_sigma_direct(model, params, mu)
        assert np.abs(closed - direct).max() <= 1e-10 * max(1.0, np.abs(direct).max())


def test_epsilon_section_kahler(cp1, ref_model):
    assert epsilon_section_residual(ref_model, GKParams.zeros(2), MU_REF) <= 1e-8
    assert epsilon_section_residual(cp1, GKParams(np.zeros((1, 1)), np.zeros((1, 1))),
                                    [0.3]) <= 1e-9


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_epsilon_section_random(seed):
    model, params, mu = random_config(seed)
    assert epsilon_section_residual(model, params, mu) <= 1e-7


def test_epsilon_residual_with_direct_sigma(ref_model, ref_params):
    sigma = connection_form_sigma_direct(ref_model, ref_params, MU_REF)
    assert epsilon_section_residual(ref_model, ref_params, MU_REF, sigma=sigma) <= 1e-10


def _sigma_fd(mu, h):
    """sigma from Bismut Christoffels built entirely out of differenced hand matrices."""
    g, _ = hand_gram(mu)
    gamma = (oracles.levi_civita_fd(lambda m: hand_gram(m)[0], mu, h)
             + 0.5 * np.einsum("ijl,lk->ijk",
                               oracles.torsion_fd(lambda m: hand_gram(m)[1], mu, h),
                               np.linalg.inv(g)))
    S = oracles.box_guillemin_hessian(mu, CUBIC)
    phi = S + C_REF
    P = np.linalg.inv(phi)
    # J_+ in column convention, from the printed row table
    Jp = np.block([[P @ F_REF / 2, -P], [phi + F_REF @ P @ F_REF / 4, -F_REF @ P / 2]]).T
    proj = 0.5 * (np.eye(4) - 1j * Jp)
    Z = proj[:, :2]
    sigma = np.empty(4, complex)
    for a in range(4):
        W = proj @ gamma[a, :2, :].T
        sigma[a] = np.trace(np.linalg.lstsq(Z, W, rcond=None)[0])
    return sigma


def test_epsilon_residual_converges_at_second_order(ref_model, ref_params):
    res = [epsilon_section_residual(ref_model, ref_params, MU_REF, sigma=_sigma_fd(MU_REF, h))
           for h in (4e-3, 2e-3, 1e-3)]
    assert res[0] > res[1] > res[2]
    for coarse, fine in zip(res, res[1:]):
        assert coarse / fine == pytest.approx(4.0, rel=0.05)
