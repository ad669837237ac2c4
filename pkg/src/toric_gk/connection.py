"""Levi-Civita and Bismut connections in the admissible chart.

Index conventions: ``gamma[..., i, j, k]`` is the coefficient of ``d_k`` in
``nabla_{d_i} d_j`` (upper index last).  Chart indices run over
``(theta_1..theta_n, mu_1..mu_n)``; every tensor depends on the mu-block only,
so theta-derivatives vanish identically.

The torsion 3-form is ``H = db`` with
``H[a, b, c] = d_a b_bc + d_b b_ca + d_c b_ab`` and the Bismut connections are
``nabla^+- = nabla^LC +- 1/2 g^-1 H``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame import GKParams, frame_jets, omega_matrix, q_matrix
from .polytope import PotentialModel

FLAVORS = ("levi_civita", "bismut_plus", "bismut_minus")


@dataclass(frozen=True, eq=False)
class ChristoffelField:
    """Connection coefficients at a point; ``gamma[i, j, k] = Gamma^k_ij``."""

    gamma: np.ndarray
    flavor: str


@dataclass(frozen=True, eq=False)
class TorsionH:
    """Components ``H[a, b, c] = H(e_a, e_b, e_c)`` of the closed 3-form ``db``."""

    H: np.ndarray


def _chart_d1(d1, n):
    """``(n, *batch, r, c)`` mu-derivatives -> ``(*batch, r, c, 2n)`` chart derivatives."""
    moved = np.moveaxis(d1, 0, -1)
    zeros = np.zeros(moved.shape[:-1] + (n,), moved.dtype)
    return np.concatenate([zeros, moved], axis=-1)


def _chart_d2(d2, n):
    """``(n, n, *batch, r, c)`` -> ``(*batch, r, c, 2n, 2n)``."""
    moved = np.moveaxis(d2, (0, 1), (-2, -1))
    out = np.zeros(moved.shape[:-2] + (2 * n, 2 * n), moved.dtype)
    out[..., n:, n:] = moved
    return out


class _Geometry:
    """Metric, torsion and their derivatives at a batch of points."""

    def __init__(self, model: PotentialModel, params: GKParams, mu):
        self.n = n = model.dim
        self.jets = jets = frame_jets(model, params, mu)
        g, b = jets["g"], jets["b"]
        self.g = g.val
        self.ginv = np.linalg.inv(g.val)
        self.dg = _chart_d1(g.d1, n)          # dg[..., a, b, i] = d_i g_ab
        self.ddg = _chart_d2(g.d2, n)         # ddg[..., a, b, i, m]
        self.db = _chart_d1(b.d1, n)
        self.ddb = _chart_d2(b.d2, n)

    @staticmethod
    def _lower_christoffel(D):
        # c[..., i, j, l] = d_j g_il + d_i g_jl - d_l g_ij
        return (np.einsum("...ilj->...ijl", D) + np.einsum("...jli->...ijl", D) - D)

    @staticmethod
    def _alternate(D):
        # H[..., a, b, c] = d_a b_bc + d_b b_ca + d_c b_ab ; D[..., b, c, a] = d_a b_bc
        return (np.einsum("...bca->...abc", D) + np.einsum("...cab->...abc", D) + D)

    def torsion(self):
        return self._alternate(self.db)

    def torsion_derivative(self):
        # dH[..., a, b, c, m]
        D = self.ddb
        return (np.einsum("...bcam->...abcm", D) + np.einsum("...cabm->...abcm", D) + D)

    def christoffel(self, sign=0):
        c = self._lower_christoffel(self.dg)
        if sign:
            c = c + sign * self.torsion()
        return 0.5 * np.einsum("...ijl,...lk->...ijk", c, self.ginv)

    def christoffel_derivative(self, sign=0):
        """``dgamma[..., i, j, k, m] = d_m Gamma^k_ij`` by exact calculus."""
        D2 = self.ddg
        dc = (np.einsum("...iljm->...ijlm", D2) + np.einsum("...jlim->...ijlm", D2) - D2)
        c = self._lower_christoffel(self.dg)
        if sign:
            c = c + sign * self.torsion()
            dc = dc + sign * self.torsion_derivative()
        dginv = -np.einsum("...ab,...bcm,...cd->...adm", self.ginv, self.dg, self.ginv)
        return 0.5 * (np.einsum("...ijlm,...lk->...ijkm", dc, self.ginv)
                      + np.einsum("...ijl,...lkm->...ijkm", c, dginv))


def _sign(flavor):
    if flavor not in FLAVORS:
        raise ValueError(f"unknown connection flavor {flavor!r}; expected one of {FLAVORS}")
    return {"levi_civita": 0, "bismut_plus": 1, "bismut_minus": -1}[flavor]


def torsion_h(model: PotentialModel, params: GKParams, mu) -> TorsionH:
    """Analytic ``H = db`` from mu-derivatives of the ``b`` blocks."""
    return TorsionH(_Geometry(model, params, mu).torsion())


def christoffel(model: PotentialModel, params: GKParams, mu, flavor="levi_civita") -> ChristoffelField:
    """Connection coefficients of the requested flavor at ``mu``."""
    s = _sign(flavor)
    return ChristoffelField(_Geometry(model, params, mu).christoffel(s), flavor)


def _gamma_derivative_fd(model, params, mu, sign, step):
    mu = np.asarray(mu, dtype=float)
    n = model.dim
    out = None
    for m in range(n):
        e = np.zeros(n)
        e[m] = step
        gp = _Geometry(model, params, mu + e).christoffel(sign)
        gm = _Geometry(model, params, mu - e).christoffel(sign)
        d = (gp - gm) / (2 * step)
        if out is None:
            out = np.zeros(d.shape + (2 * n,))
        out[..., n + m] = d
    return out


def _riemann(gamma, dgamma):
    """``R[..., i, j, k, l]``: component ``l`` of ``R(d_i, d_j) d_k``."""
    t = np.einsum("...jkli->...ijkl", dgamma)
    quad = np.einsum("...jkm,...iml->...ijkl", gamma, gamma)
    return t - np.swapaxes(t, -4, -3) + quad - np.swapaxes(quad, -4, -3)


def bismut_curvature(model: PotentialModel, params: GKParams, mu, sign=+1, fd_step=1e-4) -> np.ndarray:
    """Covariant curvature ``R(X, Y, Z, W) = g(R(X, Y) Z, W)`` of a Bismut connection.

    Parameters
    ----------
    sign : {+1, -1, 0}
        ``+1`` for ``nabla^+``, ``-1`` for ``nabla^-``, ``0`` for Levi-Civita.
    fd_step : float or None
        Central-difference step for the derivative of the analytic Christoffel
        symbols.  ``None`` differentiates them exactly instead.
    """
    if sign not in (-1, 0, 1):
        raise ValueError("sign must be +1, -1 or 0")
    geo = _Geometry(model, params, mu)
    gamma = geo.christoffel(sign)
    if fd_step is None:
        dgamma = geo.christoffel_derivative(sign)
    else:
        dgamma = _gamma_derivative_fd(model, params, mu, sign, fd_step)
    R = _riemann(gamma, dgamma)
    return np.einsum("...ijkl,...lw->...ijkw", R, geo.g)


def _fd_tensor(fn, mu, n, step):
    mu = np.asarray(mu, dtype=float)
    out = None
    for m in range(n):
        e = np.zeros(n)
        e[m] = step
        d = (fn(mu + e) - fn(mu - e)) / (2 * step)
        if out is None:
            out = np.zeros(d.shape + (2 * n,))
        out[..., n + m] = d
    return out


def covariant_derivative_endo(gamma, J, dJ):
    """``(nabla_i J)^a_b`` as ``out[..., a, b, i]``."""
    return (dJ + np.einsum("...ica,...cb->...abi", gamma, J)
            - np.einsum("...ibc,...ac->...abi", gamma, J))


def covariant_derivative_form(gamma, g, dg):
    """``(nabla_i g)_ab`` as ``out[..., a, b, i]``."""
    return (dg - np.einsum("...iac,...cb->...abi", gamma, g)
            - np.einsum("...ibc,...ac->...abi", gamma, g))


def covariant_constancy_residuals(model: PotentialModel, params: GKParams, mu, fd_step=1e-5) -> dict:
    """Max-abs of ``nabla^+ J_+``, ``nabla^- J_-`` and ``nabla^+- g``.

    ``fd_step`` differentiates ``J_+-`` by central differences; ``None`` uses
    the exact jets instead.
    """
    geo = _Geometry(model, params, mu)
    n = geo.n
    out = {}
    for s, key in ((1, "plus"), (-1, "minus")):
        gamma = geo.christoffel(s)
        jkey = f"j_{key}"
        J = geo.jets[jkey].val
        if fd_step is None:
            dJ = _chart_d1(geo.jets[jkey].d1, n)
        else:
            dJ = _fd_tensor(lambda m: frame_jets(model, params, m, check=False)[jkey].val,
                            mu, n, fd_step)
        out[f"nabla_{key}_j_{key}"] = float(np.abs(covariant_derivative_endo(gamma, J, dJ)).max())
        out[f"nabla_{key}_g"] = float(np.abs(covariant_derivative_form(gamma, geo.g, geo.dg)).max())
    return out


def canonical_scalar_curvature(model: PotentialModel, params: GKParams, mu, fd_step=1e-4) -> float:
    """Trace, against ``(g, J_-)``, of the ``nabla^+`` curvature of ``K_+^-1``.

    ``R^+`` commutes with ``J_+``, so its complex trace on ``T^{1,0}_+`` is
    ``-i/2 tr(J_+ R^+(X, Y))``.  With ``rho = 1/2 tr(J_+ R^+)`` the result is
    ``sum_a rho(e_a, J_- e_a)`` over a g-orthonormal basis; the normalization
    makes it the Riemannian scalar curvature when ``J_+ = J_-``.
    """
    geo = _Geometry(model, params, mu)
    gamma = geo.christoffel(1)
    if fd_step is None:
        dgamma = geo.christoffel_derivative(1)
    else:
        dgamma = _gamma_derivative_fd(model, params, mu, 1, fd_step)
    R = _riemann(gamma, dgamma)                 # R[i, j, k, l] = (R(d_i, d_j))^l_k
    Jp = geo.jets["j_plus"].val
    Jm = geo.jets["j_minus"].val
    rho = 0.5 * np.einsum("...al,...ijal->...ij", Jp, R)
    # sum_a rho(e_a, J- e_a) over an orthonormal basis = tr(rho J- g^-1)
    return np.einsum("...ij,...jk,...ki->...", rho, Jm, geo.ginv)


def _dzbar_minus(phi, F):
    """Columns: chart components of ``d/dzbar^-_n``."""
    n = phi.shape[-1]
    PT = np.linalg.inv(phi).T
    theta = 0.5 * PT @ (phi.T - 0.5j * F)
    mu = -0.5j * PT
    return np.concatenate([theta.T, mu.T], axis=-2)


def connection_form_sigma(model: PotentialModel, params: GKParams, mu) -> np.ndarray:
    """Connection 1-form of ``nabla^+`` on ``K_+^-1`` in the frame ``dz_1^+ ^ .. ^ dz_n^+``.

    Built from the closed-form covariant derivatives of ``d/dtheta_j`` and the
    matrix ``Q``.  Returns the complex chart components, shape ``(2n,)``.

    Notes
    -----
    With ``dP[a, b, k] = d(phi^-1)_ab / dmu_k`` the lowered derivatives are

    * ``g(nabla_theta_i d/dtheta_j, .) = -1/2 dP[j, i, k] dmu_k``
    * ``g(nabla_mu_i d/dtheta_j, .) = 1/2 dP[j, k, i] dtheta_k
      + 1/4 (dPF[j, k, i] - dPF[j, i, k]) dmu_k``

    where ``PF = phi^-1 F``.  Each 1-form is projected with
    ``1/2 (Id + i J_+^*)``, rewritten in ``dzbar^+`` and raised with
    ``g^-1 dzbar_l = Q[l, m] d/dz_m``.
    """
    jets = frame_jets(model, params, mu)
    n = model.dim
    F = params.F
    P = jets["phi_inv"]
    dP = np.moveaxis(P.d1, 0, -1)                     # dP[a, b, k] = (phi^-1)_ab,k
    dPF = np.einsum("abk,bc->ack", dP, F)
    Q = q_matrix(jets["phi_s"].val, jets["phi"].val, F)
    PT = P.val.T
    m_theta = 0.5 * (np.eye(n) - 0.5j * F @ PT)      # 1/2 (Id + i J^*) dtheta -> dzbar
    m_mu = -0.5j * PT                                 # 1/2 (Id + i J^*) dmu -> dzbar
    QT = Q.T
    theta = np.einsum("jik,kl,jl->i", -0.5 * dP, m_mu, QT)
    mu_c = np.einsum("jki,kl,jl->i", 0.5 * dP, m_theta, QT)
    d_mu = 0.25 * (dPF - np.swapaxes(dPF, 1, 2))      # [j, k, i] -> dPF[j,k,i] - dPF[j,i,k]
    mu_d = np.einsum("jki,kl,jl->i", d_mu, m_mu, QT)
    return np.concatenate([theta, mu_c + mu_d])


def connection_form_sigma_direct(model: PotentialModel, params: GKParams, mu) -> np.ndarray:
    """The same 1-form computed straight from the Bismut Christoffel symbols.

    ``d/dz_j^+ = 1/2 (Id - i J_+) d/dtheta_j`` is transported with
    ``nabla^+`` and re-expanded in the ``d/dz^+`` basis; ``sigma`` is the trace.
    """
    geo = _Geometry(model, params, mu)
    n = geo.n
    gamma = geo.christoffel(1)
    Jp = geo.jets["j_plus"].val
    proj = 0.5 * (np.eye(2 * n) - 1j * Jp)
    Z = proj[:, :n]
    sigma = np.empty(2 * n, complex)
    for a in range(2 * n):
        W = proj @ gamma[a, :n, :].T        # column j: nabla_a d/dz_j
        coeff = np.linalg.lstsq(Z, W, rcond=None)[0]
        sigma[a] = np.trace(coeff)
    return sigma


def log_epsilon_gradient(model: PotentialModel, params: GKParams, mu) -> np.ndarray:
    """mu-gradient of ``log eps = -1/2 log(det(phi_s Xi) / det(phi)^2)``."""
    jets = frame_jets(model, params, mu)
    S, xi, phi = jets["phi_s"], jets["xi"], jets["phi"]
    tr = lambda A: np.trace(np.linalg.solve(A.val, A.d1), axis1=-2, axis2=-1)  # noqa: E731
    return -0.5 * (tr(S) + tr(xi) - 2.0 * tr(phi))


def epsilon_section_residual(model: PotentialModel, params: GKParams, mu, sigma=None) -> float:
    """``max_k |sigma(d/dzbar_k^-) + d/dzbar_k^- log eps|``.

    Vanishes exactly when ``eps dz_1^+ ^ .. ^ dz_n^+`` is a ``J_-``-holomorphic
    section of ``K_+^-1``.
    """
    mu = np.asarray(mu, dtype=float).reshape(model.dim)
    if sigma is None:
        sigma = connection_form_sigma(model, params, mu)
    phi = model.hessian(mu) + params.C
    Zbar = _dzbar_minus(phi, params.F)          # (2n, n)
    n = model.dim
    grad = np.concatenate([np.zeros(n), log_epsilon_gradient(model, params, mu)])
    resid = sigma @ Zbar + grad @ Zbar
    return float(np.abs(resid).max())


def _derivation_3form(T, J):
    """``(J^* T)(X, Y, Z) = T(JX, Y, Z) + T(X, JY, Z) + T(X, Y, JZ)``."""
    return (np.einsum("dbc,da->abc", T, J) + np.einsum("adc,db->abc", T, J)
            + np.einsum("abd,dc->abc", T, J))


def integrability_residuals(model: PotentialModel, params: GKParams, mu, fd_step=1e-5) -> dict:
    """Max-abs of ``d^c_+ omega_+ + d^c_- omega_-`` and of ``H + d^c_+ omega_+``.

    ``omega_+-(X, Y) = g(J_+- X, Y)`` and ``d^c = [d, J^*]`` with ``J^*`` acting
    as a derivation; since ``J^* omega = 0`` this is ``-J^* d omega``.  ``d omega``
    is taken by central differences.
    """
    mu = np.asarray(mu, dtype=float).reshape(model.dim)
    n = model.dim

    def omega(m, key):
        jets = frame_jets(model, params, m, check=False)
        return jets[key].val.T @ jets["g"].val

    geo = _Geometry(model, params, mu)
    dc = {}
    for key in ("j_plus", "j_minus"):
        d_omega = _Geometry._alternate(_fd_tensor(lambda m: omega(m, key), mu, n, fd_step))
        dc[key] = -_derivation_3form(d_omega, geo.jets[key].val)
    return {"dc_sum": float(np.abs(dc["j_plus"] + dc["j_minus"]).max()),
            "torsion_vs_dc": float(np.abs(geo.torsion() + dc["j_plus"]).max())}


def curvature_symmetry_residuals(model: PotentialModel, params: GKParams, mu, fd_step=1e-4) -> dict:
    """Residuals of the Bismut curvature identities at one point.

    * ``pair_exchange``: ``R^+(X,Y,Z,W) - R^-(Z,W,X,Y)``
    * ``plus_j_minus_invariance``: ``R^+(J_-X, J_-Y, Z, W) - R^+(X,Y,Z,W)``
    * ``minus_j_plus_invariance``: ``R^-(J_+X, J_+Y, Z, W) - R^-(X,Y,Z,W)``
    * ``antisymmetry_xy`` / ``antisymmetry_zw`` for both connections
    """
    mu = np.asarray(mu, dtype=float).reshape(model.dim)
    Rp = bismut_curvature(model, params, mu, +1, fd_step)
    Rm = bismut_curvature(model, params, mu, -1, fd_step)
    jets = frame_jets(model, params, mu)
    Jp, Jm = jets["j_plus"].val, jets["j_minus"].val

    def rotate(R, J):
        return np.einsum("abkw,ai,bj->ijkw", R, J, J)

    return {
        "pair_exchange": float(np.abs(Rp - np.einsum("kwij->ijkw", Rm)).max()),
        "plus_j_minus_invariance": float(np.abs(rotate(Rp, Jm) - Rp).max()),
        "minus_j_plus_invariance": float(np.abs(rotate(Rm, Jp) - Rm).max()),
        "antisymmetry_xy": float(max(np.abs(R + np.swapaxes(R, 0, 1)).max() for R in (Rp, Rm))),
        "antisymmetry_zw": float(max(np.abs(R + np.swapaxes(R, 2, 3)).max() for R in (Rp, Rm))),
    }
