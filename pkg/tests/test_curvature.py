import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toric_gk import (CurvatureSample, GKParams, GridSpec, InadmissibleParamsError, MomentPolytope,
                      RicciFormSample, det_identity_residuals, equivalence_scan,
                      guillemin_potential, interior_grid, kappa_boulanger, kappa_from_ricci,
                      kappa_goto, perturbed_potential, quadratic_potential, ricci_form)
from toric_gk.frame import omega_matrix

import oracles
from factories import antisymmetric, random_config

ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])
MU_REF = np.array([0.3, 0.6])
F_REF = 0.4 * ROT
C_REF = 0.3 * ROT

# Frozen from the Richardson-extrapolated finite-difference oracles in oracles.py
# (steps 2e-3 and 1e-3 agree to 2e-10 for Boulanger, 5e-9 for Goto).
KAPPA_REF = 8.169289148137
KAPPA_REF_KAHLER = 8.0677698674


@pytest.fixture(scope="module")
def ref_model():
    square = MomentPolytope.box([0, 0], [1, 1])
    return perturbed_potential(guillemin_potential(square), {(3, 1): 0.05})


def hand_hessian(mu):
    return oracles.box_guillemin_hessian(mu, 0.05)


def test_frozen_reference_values(ref_model):
    params = GKParams(C_REF, F_REF)
    assert kappa_boulanger(ref_model, params, MU_REF) == pytest.approx(KAPPA_REF, abs=1e-8)
    assert kappa_goto(ref_model, params, MU_REF) == pytest.approx(KAPPA_REF, abs=1e-8)
    kahler = GKParams.zeros(2)
    assert kappa_boulanger(ref_model, kahler, MU_REF) == pytest.approx(KAPPA_REF_KAHLER, abs=1e-8)


def test_live_oracles(ref_model):
    params = GKParams(C_REF, F_REF)
    mu = np.array([0.7, 0.25])
    kb = oracles.kappa_boulanger_fd(hand_hessian, F_REF, mu)
    kg = oracles.kappa_goto_fd(hand_hessian, F_REF, mu)
    assert kappa_boulanger(ref_model, params, mu) == pytest.approx(kb, abs=1e-7)
    assert kappa_goto(ref_model, params, mu) == pytest.approx(kg, abs=1e-6)


def test_cp1_anchor(cp1):
    grid = interior_grid(cp1.polytope, GridSpec(101, 0.05))
    params = GKParams.zeros(1)
    np.testing.assert_allclose(kappa_boulanger(cp1, params, grid), 4.0, atol=1e-8)
    np.testing.assert_allclose(kappa_goto(cp1, params, grid), 4.0, atol=1e-8)
    assert isinstance(kappa_boulanger(cp1, params, [0.3]), float)


def test_product_anchor(square):
    model = guillemin_potential(square)
    grid = interior_grid(square, GridSpec(11, 0.05))
    np.testing.assert_allclose(kappa_goto(model, GKParams.zeros(2), grid), 8.0, atol=1e-8)


def test_rescaled_segment():
    # [0, L]: Xi^-1 = 2 mu (L - mu) / L, so kappa = 4 / L
    model = guillemin_potential(MomentPolytope.segment(0.0, 2.5))
    grid = interior_grid(model.polytope, GridSpec(9, 0.1))
    np.testing.assert_allclose(kappa_boulanger(model, GKParams.zeros(1), grid), 4 / 2.5,
                               atol=1e-12)


@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 3))
def test_quadratic_potential_is_flat(seed, n):
    rng = np.random.default_rng(seed)
    model = quadratic_potential(MomentPolytope.box(np.zeros(n), np.ones(n)))
    F = antisymmetric(rng, n, 0.5)
    params = GKParams(antisymmetric(rng, n, 2.0), F)
    mu = rng.uniform(0.1, 0.9, n)
    assert kappa_boulanger(model, params, mu) == 0.0
    assert kappa_goto(model, params, mu) == 0.0


def test_quadratic_ricci_form_vanishes():
    model = quadratic_potential(MomentPolytope.box([0, 0], [1, 1]))
    assert not np.any(ricci_form(model, GKParams.zeros(2), [0.4, 0.4]).P1)


@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 3))
def test_equivalence(seed, n):
    model, params, mu = random_config(seed, n)
    kb = kappa_boulanger(model, params, mu)
    assert abs(kb - kappa_goto(model, params, mu)) <= 1e-7 * (1 + abs(kb))
    assert abs(kappa_from_ricci(ricci_form(model, params, mu))
               - kappa_goto(model, params, mu)) <= 1e-7


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_kahler_reduction(seed):
    model, _, mu = random_config(seed)
    params = GKParams.zeros(2)
    abreu = oracles.kappa_boulanger_fd(lambda m: model.hessian(m, check=False),
                                       np.zeros((2, 2)), mu, h=1e-3)
    assert kappa_goto(model, params, mu) == pytest.approx(abreu, abs=1e-5)
    assert kappa_goto(model, params, mu) == pytest.approx(kappa_boulanger(model, params, mu),
                                                          abs=1e-9)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_boulanger_is_bitwise_independent_of_c(seed):
    model, params, mu = random_config(seed)
    rng = np.random.default_rng(seed)
    other = GKParams(antisymmetric(rng, 2, 3.0), params.F)
    assert kappa_boulanger(model, params, mu) == kappa_boulanger(model, other, mu)


def test_ricci_form_depends_on_c_while_kappa_does_not():
    # needs n = 3: for n = 2 every C is a multiple of F
    model, params, mu = random_config(0, 3)
    rng = np.random.default_rng(99)
    a = ricci_form(model, params, mu)
    b = ricci_form(model, GKParams(antisymmetric(rng, 3, 0.8), params.F), mu)
    assert np.abs(a.P1 - b.P1).max() > 1e-2
    assert kappa_from_ricci(a) == pytest.approx(kappa_from_ricci(b), abs=1e-10)


def test_cp1_ricci_form(cp1):
    sample = ricci_form(cp1, GKParams.zeros(1), [0.37])
    np.testing.assert_allclose(sample.P1, [[0.0, -2.0], [2.0, 0.0]], atol=1e-12)
    assert kappa_from_ricci(sample) == pytest.approx(4.0, abs=1e-12)
    assert sample.alpha.shape == (2,)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_trace_normalization(n):
    assert kappa_from_ricci(omega_matrix(n)) == 2 * n


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_ricci_form_antisymmetric_and_matches_fd_alpha(seed):
    model, params, mu = random_config(seed)
    sample = ricci_form(model, params, mu)
    np.testing.assert_array_equal(sample.P1, -sample.P1.T)
    h = 1e-4
    dalpha = np.stack([(ricci_form(model, params, mu + h * e).alpha
                        - ricci_form(model, params, mu - h * e).alpha) / (2 * h)
                       for e in np.eye(2)])
    full = np.zeros((4, 4))
    full[2:, :] = dalpha
    expected = full - full.T
    assert np.abs(sample.P1 - expected).max() <= 1e-5 * max(1.0, np.abs(dalpha).max())


def test_ricci_sample_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        RicciFormSample(P1=np.ones((2, 2)), alpha=np.zeros(2))


def test_batched_ricci(ref_model):
    params = GKParams(C_REF, F_REF)
    grid = interior_grid(ref_model.polytope, GridSpec(4, 0.1))
    stacked = ricci_form(ref_model, params, grid)
    assert stacked.P1.shape == (16, 4, 4)
    for k in (0, 7, 15):
        np.testing.assert_allclose(stacked.P1[k], ricci_form(ref_model, params, grid[k]).P1,
                                   rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(kappa_from_ricci(stacked), kappa_goto(ref_model, params, grid),
                               atol=1e-10)


def test_det_identity_examples():
    r1, r2 = det_identity_residuals(np.eye(2), ROT)
    assert r1 <= 1e-15 and r2 <= 1e-15
    assert np.linalg.det(np.eye(2) + 0.5j * ROT) == pytest.approx(0.75)
    S = np.array([[2.0, 0.3], [0.3, 1.0]])
    assert det_identity_residuals(S, np.zeros((2, 2)))[0] == 0.0


@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 4))
def test_det_identity_random(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    S = A @ A.T + np.eye(n)
    F = antisymmetric(rng, n, 0.3)
    r1, r2 = det_identity_residuals(S, F)
    assert r1 <= 1e-10 and r2 <= 1e-10


@pytest.mark.parametrize("S, F, exc", [
    (np.array([[1.0, 0.0], [0.0, -1.0]]), np.zeros((2, 2)), ValueError),
    (np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros((2, 2)), ValueError),
    (np.eye(2), 3 * ROT, InadmissibleParamsError),
    (np.eye(3), np.zeros((2, 2)), ValueError),
])
def test_det_identity_errors(S, F, exc):
    with pytest.raises(exc):
        det_identity_residuals(S, F)


def test_equivalence_scan_cp1(cp1):
    grid = interior_grid(cp1.polytope, GridSpec(101, 0.05))
    samples, summary = equivalence_scan(cp1, GKParams.zeros(1), grid)
    assert len(samples) == 101 and summary.passed and summary.n_failed == 0
    assert summary.max_abs_diff <= 1e-9
    s = samples[10]
    assert s.ok and s.abs_diff == abs(s.kappa_boulanger - s.kappa_goto)
    assert s.as_row() == [s.mu[0], s.kappa_boulanger, s.kappa_goto, s.kappa_from_ricci,
                          s.abs_diff]
    assert summary.as_dict()["n_points"] == 101


def test_equivalence_scan_records_pointwise_failures(square):
    # F = 4.5 rot is admissible near the boundary but not at the centre
    model = guillemin_potential(square)
    grid = interior_grid(square, GridSpec(5, 0.05))
    samples, summary = equivalence_scan(model, GKParams(np.zeros((2, 2)), 4.5 * ROT), grid)
    assert len(samples) == grid.shape[0]
    bad = [s for s in samples if not s.ok]
    assert 0 < len(bad) < len(samples)
    assert all("InadmissibleParamsError" in s.error for s in bad)
    assert np.isnan(bad[0].kappa_boulanger)
    assert not summary.passed and summary.n_failed == len(bad)
    assert len(summary.errors) == len(bad)


def test_equivalence_scan_without_ricci(ref_model):
    grid = interior_grid(ref_model.polytope, GridSpec(3, 0.1))
    samples, summary = equivalence_scan(ref_model, GKParams(C_REF, F_REF), grid,
                                        with_ricci=False)
    assert summary.passed and all(np.isnan(s.kappa_from_ricci) for s in samples)


def test_equivalence_scan_empty_grid(cp1):
    with pytest.raises(ValueError):
        equivalence_scan(cp1, GKParams.zeros(1), np.empty((0, 1)))


def test_inadmissible_point_raises(square):
    with pytest.raises(InadmissibleParamsError):
        kappa_boulanger(guillemin_potential(square), GKParams(np.zeros((2, 2)), 4.5 * ROT),
                        [0.5, 0.5])


def test_sample_invariant_fields():
    s = CurvatureSample((0.5,), 4.0, 4.0, 4.0, 0.0)
    assert s.ok and s.error is None
