"""Scalar curvature of toric generalized Kähler structures.

Two independent formulas are provided,

* ``kappa_boulanger = -sum_ij d^2 (Xi^-1)_ij / dmu_i dmu_j``
* ``kappa_goto = sum_ij d_i[(d_j f) (Xi^-1)_ij]`` with ``f = 1/2 log det(phi_s Xi)``

together with the Ricci form whose symplectic trace reproduces the second.
All derivatives are exact (second-order jets over the Hessian tensors).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _jet
from .exceptions import InadmissibleParamsError, ToricGKError
from .frame import (GKParams, admissibility_eigenvalues, check_admissible,
                    check_conditioning, frame_jets)
from .polytope import PotentialModel


def _as_points(model: PotentialModel, mu):
    mu = np.asarray(mu, dtype=float)
    single = mu.ndim <= 1
    pts = mu.reshape(-1, model.dim)
    return pts, single


def _xi_jets(model: PotentialModel, F: np.ndarray, pts):
    """Jets of ``phi_s`` and ``Xi``; ``C`` never enters."""
    S = model.hessian_jet(pts)
    check_admissible(S.val, F, pts)
    xi = S + F @ _jet.inv(S) @ F * 0.25
    check_conditioning(xi.val, "Xi")
    return S, xi


def _unwrap(values, single):
    return float(values[0]) if single else values


def kappa_boulanger(model: PotentialModel, params: GKParams, mu):
    """``-sum_ij (Xi^-1)_ij,ij``.

    Depends on ``tau`` and ``F`` only.  ``mu`` may be one point or an
    ``(m, n)`` batch; a batch returns an array.
    """
    pts, single = _as_points(model, mu)
    _, xi = _xi_jets(model, params.F, pts)
    xi_inv = _jet.inv(xi)
    kappa = -np.einsum("ij...ij->...", xi_inv.d2)
    return _unwrap(kappa, single)


def _goto_parts(model, params, pts):
    S, xi = _xi_jets(model, params.F, pts)
    f = (_jet.logdet(S) + _jet.logdet(xi)) * 0.5
    xi_inv = _jet.inv(xi)
    return f, xi_inv


def kappa_goto(model: PotentialModel, params: GKParams, mu):
    """``sum_ij d_i[f_j (Xi^-1)_ij]`` with ``f = 1/2 log det(phi_s Xi)``."""
    pts, single = _as_points(model, mu)
    f, xi_inv = _goto_parts(model, params, pts)
    # f.d1: (n, m), f.d2: (n, n, m), xi_inv.d1: (n, m, n, n)
    kappa = (np.einsum("ij...,...ij->...", f.d2, xi_inv.val)
             + np.einsum("j...,i...ij->...", f.d1, xi_inv.d1))
    return _unwrap(kappa, single)


@dataclass(frozen=True, eq=False)
class RicciFormSample:
    """Chart components ``P1[a, b] = P1(e_a, e_b)`` of the Ricci form."""

    P1: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        if not np.array_equal(self.P1, -np.swapaxes(self.P1, -1, -2)):
            raise ValueError("P1 must be exactly antisymmetric")


def ricci_form(model: PotentialModel, params: GKParams, mu) -> RicciFormSample:
    """``P1 = d alpha`` with ``alpha = (J_+^* + J_-^*)^-1 d log det(phi_s Xi)^(1/2)``.

    ``(J_+^* + J_-^*)^-1`` acts on 1-forms as ``1/2`` times the transpose of
    ``((J_+ + J_-)/2)^-1``.  ``alpha`` has both ``dtheta`` and ``dmu``
    components but depends on ``mu`` only, so only ``mu``-rows of
    ``d alpha`` are nonzero before antisymmetrization.

    A batch of points gives stacked arrays of shape ``(m, 2n, 2n)`` and ``(m, 2n)``.
    """
    pts, single = _as_points(model, mu)
    n, m = model.dim, pts.shape[0]
    jets = frame_jets(model, params, pts)
    S, xi, A = jets["phi_s"], jets["xi"], jets["a_half_inv"]
    f = (_jet.logdet(S) + _jet.logdet(xi)) * 0.5
    df = np.concatenate([np.zeros((m, n)), f.d1.T], axis=1)
    # ddf[p, k, :] = d_k df at point p
    ddf = np.concatenate([np.zeros((m, n, n)), np.moveaxis(f.d2, -1, 0)], axis=2)
    alpha = 0.5 * np.einsum("pab,pa->pb", A.val, df)
    # D[p, k, b] = d alpha_b / d mu_k
    D = 0.5 * (np.einsum("kpab,pa->pkb", A.d1, df) + np.einsum("pka,pab->pkb", ddf, A.val))
    full = np.zeros((m, 2 * n, 2 * n))
    full[:, n:, :] = D
    P1 = full - np.swapaxes(full, 1, 2)
    if single:
        return RicciFormSample(P1=P1[0], alpha=alpha[0])
    return RicciFormSample(P1=P1, alpha=alpha)


def kappa_from_ricci(sample):
    """Symplectic trace ``2 sum_i P1(d/dmu_i, d/dtheta_i)``; ``P1 = omega`` gives ``2n``.

    Stacked forms give an array, a single form a float.
    """
    P1 = sample.P1 if isinstance(sample, RicciFormSample) else np.asarray(sample, float)
    n = P1.shape[-1] // 2
    kappa = 2.0 * np.einsum("...ii->...", P1[..., n:, :n])
    return float(kappa) if P1.ndim == 2 else kappa


def det_identity_residuals(phi_s, F):
    """Residuals of ``det(phi_s -+ i/2 F) = (det phi_s det Xi)^(1/2)`` and of
    ``Xi^-1 = (phi_s - i/2 F)^-1 phi_s (phi_s + i/2 F)^-1``.

    Returns
    -------
    r1 : float
        Relative error of the determinant identity (worst of both signs).
    r2 : float
        Max-abs entry error of the factorization.
    """
    S = np.atleast_2d(np.asarray(phi_s, dtype=float))
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if S.shape != F.shape or S.shape[0] != S.shape[1]:
        raise ValueError("phi_s and F must be square matrices of the same shape")
    if not np.allclose(S, S.T, rtol=0, atol=1e-12 * max(1.0, np.abs(S).max())):
        raise ValueError("phi_s must be symmetric")
    if np.linalg.eigvalsh(S)[0] <= 0:
        raise ValueError("phi_s must be positive-definite")
    lam = admissibility_eigenvalues(S, F)[0]
    if lam <= 0:
        raise InadmissibleParamsError(
            f"F is inadmissible for phi_s: min eigenvalue {lam:.6g}", min_eigenvalue=float(lam))
    xi = S + 0.25 * F @ np.linalg.solve(S, F)
    rhs = np.sqrt(np.linalg.det(S) * np.linalg.det(xi))
    minus, plus = S - 0.5j * F, S + 0.5j * F
    r1 = max(abs(np.linalg.det(minus) - rhs), abs(np.linalg.det(plus) - rhs)) / abs(rhs)
    fact = np.linalg.solve(minus, S) @ np.linalg.inv(plus)
    r2 = np.abs(fact - np.linalg.inv(xi)).max()
    return float(r1), float(r2)


@dataclass(frozen=True)
class CurvatureSample:
    mu: tuple
    kappa_boulanger: float
    kappa_goto: float
    kappa_from_ricci: float
    abs_diff: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def as_row(self) -> list:
        return [*self.mu, self.kappa_boulanger, self.kappa_goto,
                self.kappa_from_ricci, self.abs_diff]


@dataclass(frozen=True)
class ScanSummary:
    n_points: int
    n_failed: int
    max_abs_diff: float
    max_rel_diff: float
    tolerance: float
    passed: bool
    errors: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"n_points": self.n_points, "n_failed": self.n_failed,
                "max_abs_diff": self.max_abs_diff, "max_rel_diff": self.max_rel_diff,
                "tolerance": self.tolerance, "passed": self.passed, "errors": self.errors}


def _sample(model, params, mu) -> CurvatureSample:
    kb = kappa_boulanger(model, params, mu)
    kg = kappa_goto(model, params, mu)
    kr = kappa_from_ricci(ricci_form(model, params, mu))
    return CurvatureSample(tuple(float(x) for x in mu), kb, kg, kr, abs(kb - kg))


def _failed(mu, exc) -> CurvatureSample:
    nan = float("nan")
    return CurvatureSample(tuple(float(x) for x in mu), nan, nan, nan, nan,
                           error=f"{type(exc).__name__}: {exc}")


def equivalence_scan(model: PotentialModel, params: GKParams, grid, tolerance: float = 1e-7,
                     with_ricci: bool = True):
    """Compare both scalar curvatures at every grid point.

    Pointwise failures (conditioning, admissibility) are recorded on the
    sample and counted, never raised.  The scan passes iff no point failed and
    ``max |kB - kG| / (1 + |kB|) <= tolerance``.

    Returns
    -------
    samples : list of CurvatureSample
    summary : ScanSummary
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise ValueError("grid must be nonempty")
    try:
        kb = np.atleast_1d(kappa_boulanger(model, params, grid))
        kg = np.atleast_1d(kappa_goto(model, params, grid))
        kr = (kappa_from_ricci(ricci_form(model, params, grid)) if with_ricci
              else np.full(grid.shape[0], np.nan))
        batch_ok = True
    except (ToricGKError, np.linalg.LinAlgError):
        batch_ok = False
    samples = []
    for k, mu in enumerate(grid):
        try:
            if batch_ok:
                samples.append(CurvatureSample(tuple(float(x) for x in mu), float(kb[k]),
                                               float(kg[k]), float(kr[k]),
                                               float(abs(kb[k] - kg[k]))))
            elif with_ricci:
                samples.append(_sample(model, params, mu))
            else:
                b, g = kappa_boulanger(model, params, mu), kappa_goto(model, params, mu)
                samples.append(CurvatureSample(tuple(float(x) for x in mu), b, g,
                                               float("nan"), abs(b - g)))
        except (ToricGKError, np.linalg.LinAlgError) as exc:
            samples.append(_failed(mu, exc))
    good = [s for s in samples if s.ok]
    max_abs = max((s.abs_diff for s in good), default=float("nan"))
    max_rel = max((s.abs_diff / (1.0 + abs(s.kappa_boulanger)) for s in good),
                  default=float("nan"))
    n_failed = len(samples) - len(good)
    passed = n_failed == 0 and bool(max_rel <= tolerance)
    summary = ScanSummary(len(samples), n_failed, float(max_abs), float(max_rel),
                          float(tolerance), passed,
                          [{"mu": list(s.mu), "error": s.error} for s in samples if not s.ok])
    return samples, summary
