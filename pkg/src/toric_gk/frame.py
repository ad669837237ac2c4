"""Pointwise matrices of a toric generalized Kähler structure of symplectic type.

Conventions
-----------
The chart basis is ordered ``(d/dtheta_1..d/dtheta_n, d/dmu_1..d/dmu_n)``.

* Endomorphisms (``J_plus``, ``J_minus``, ``a_half_inv``) are stored in the
  column convention: ``J @ v`` gives the components of ``J v``.
* Bilinear forms (``g``, ``b``, ``omega``) are Gram matrices,
  ``g[a, b] = g(e_a, e_b)``.
* ``omega = sum_i dmu_i ^ dtheta_i``, whose Gram matrix is ``[[0, -I], [I, 0]]``.

With these conventions the structure identities read
``g = -1/2 (J+ + J-)^T omega``, ``b = -1/2 (J+ - J-)^T omega`` and
``J- = -omega^-T J+^T omega^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _jet
from ._jet import Jet
from .exceptions import ConditioningError, InadmissibleParamsError
from .polytope import PotentialModel

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class GKParams:
    """The two constant antisymmetric matrices ``C`` (= ``phi_a``) and ``F``."""

    C: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        F = np.atleast_2d(np.asarray(self.F, dtype=float))
        for name, M in (("C", C), ("F", F)):
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
            if not np.array_equal(M.T, -M):
                raise ValueError(f"{name} must be exactly antisymmetric")
        if C.shape != F.shape:
            raise ValueError(f"C has shape {C.shape} but F has shape {F.shape}")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "F", F)

    @classmethod
    def zeros(cls, n: int) -> "GKParams":
        return cls(np.zeros((n, n)), np.zeros((n, n)))

    @property
    def dim(self) -> int:
        return self.C.shape[0]


def omega_matrix(n: int) -> np.ndarray:
    I, Z = np.eye(n), np.zeros((n, n))
    return np.block([[Z, -I], [I, Z]])


@dataclass(frozen=True, eq=False)
class FrameTensors:
    """All structure matrices at one interior point."""

    mu: np.ndarray
    phi_s: np.ndarray
    phi: np.ndarray
    xi: np.ndarray
    q: np.ndarray
    j_plus: np.ndarray
    j_minus: np.ndarray
    g: np.ndarray
    b: np.ndarray
    omega: np.ndarray
    a_half_inv: np.ndarray

    @property
    def dim(self) -> int:
        return self.phi_s.shape[-1]

    def as_dict(self) -> dict:
        out = {}
        for name in ("mu", "phi_s", "phi", "xi", "j_plus", "j_minus", "g", "b",
                     "omega", "a_half_inv"):
            out[name] = getattr(self, name).tolist()
        out["q_real"] = self.q.real.tolist()
        out["q_imag"] = self.q.imag.tolist()
        return out


def admissibility_eigenvalues(phi_s, F) -> np.ndarray:
    """Eigenvalues of ``I + 1/4 [(phi_s)^-1/2 F (phi_s)^-1/2]^2``, batched, ascending."""
    w, V = np.linalg.eigh(phi_s)
    root_inv = (V / np.sqrt(w)[..., None, :]) @ np.swapaxes(V, -1, -2)
    K = root_inv @ F @ root_inv
    n = F.shape[-1]
    M = np.eye(n) + 0.25 * K @ K
    return np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2)))


def check_conditioning(phi, what: str = "phi") -> None:
    cond = np.linalg.cond(phi)
    worst = float(np.max(cond))
    if not np.isfinite(worst) or worst > COND_LIMIT:
        raise ConditioningError(f"{what} is ill-conditioned (condition number {worst:.3e})",
                                condition_number=worst)


def check_admissible(phi_s, F, mu=None) -> None:
    lam = admissibility_eigenvalues(phi_s, F)[..., 0]
    flat = np.atleast_1d(lam).reshape(-1)
    k = int(np.argmin(flat))
    if flat[k] <= 0.0:
        pt = None if mu is None else np.asarray(mu).reshape(-1, np.shape(F)[-1])[k]
        raise InadmissibleParamsError(
            f"parameters inadmissible: min eigenvalue {flat[k]:.6g} <= 0"
            + ("" if pt is None else f" at mu={pt.tolist()}"),
            min_eigenvalue=float(flat[k]), point=pt)


def structure_jets(S: Jet, C: np.ndarray, F: np.ndarray) -> dict:
    """Jets of every frame matrix, given the Hessian jet ``S``.

    Only ``S`` varies with mu; ``C`` and ``F`` are constants.
    """
    phi = S + C
    P = _jet.inv(phi)
    PT = P.T
    Ps, Pa = _jet.sym(P), _jet.skew(P)
    S_inv = _jet.inv(S)
    xi = S + F @ S_inv @ F * 0.25
    half = 0.5
    # column convention = transpose of the row-convention tables
    jp_rows = _jet.block([[P @ F * half, -P],
                          [phi + F @ P @ F * 0.25, -(F @ P) * half]])
    jm_rows = _jet.block([[-(PT @ F) * half, -PT],
                          [phi.T + F @ PT @ F * 0.25, F @ PT * half]])
    g = _jet.block([[Ps, Pa @ F * half],
                    [F @ Pa * half, S + F @ Ps @ F * 0.25]])
    b = _jet.block([[Pa, Ps @ F * half],
                    [F @ Ps * half, F @ Pa @ F * 0.25 + C]])
    xi_inv = _jet.inv(xi)
    phi0 = S_inv @ C
    a_half_rows = _jet.block([
        [xi_inv @ F @ phi0 * half, xi_inv],
        [-(phi.T @ S_inv @ phi) + phi0.T @ F @ xi_inv @ F @ phi0 * 0.25,
         phi0.T @ F @ xi_inv * half]])
    return {
        "phi_s": S, "phi": phi, "phi_inv": P, "phi_s_inv": S_inv,
        "xi": xi, "xi_inv": xi_inv,
        "j_plus": jp_rows.T, "j_minus": jm_rows.T,
        "g": g, "b": b, "a_half_inv": a_half_rows.T,
    }


def frame_jets(model: PotentialModel, params: GKParams, mu, check: bool = True) -> dict:
    """Structure jets at ``mu`` (batched), after domain/convexity/admissibility checks."""
    if params.dim != model.dim:
        raise ValueError(f"params have dimension {params.dim}, potential {model.dim}")
    mu = np.asarray(mu, dtype=float)
    S = model.hessian_jet(mu)
    if check:
        check_admissible(S.val, params.F, mu)
        check_conditioning(S.val + params.C)
    return structure_jets(S, params.C, params.F)


def q_matrix(phi_s, phi, F) -> np.ndarray:
    """``Q = 2 phi^T (phi_s - i/2 F)^-1 phi``, coefficients of ``g^-1 dzbar^+``."""
    return 2.0 * np.swapaxes(phi, -1, -2) @ np.linalg.solve(phi_s - 0.5j * F, phi + 0j)


def assemble_frame(model: PotentialModel, params: GKParams, mu) -> FrameTensors:
    """Assemble every structure matrix at one point, or stacked over an ``(m, n)`` batch."""
    mu = np.asarray(mu, dtype=float)
    if mu.ndim <= 1:
        mu = mu.reshape(model.dim)
    jets = frame_jets(model, params, mu)
    phi_s = jets["phi_s"].val
    phi = jets["phi"].val
    return FrameTensors(
        mu=mu, phi_s=phi_s, phi=phi, xi=jets["xi"].val,
        q=q_matrix(phi_s, phi, params.F),
        j_plus=jets["j_plus"].val, j_minus=jets["j_minus"].val,
        g=jets["g"].val, b=jets["b"].val, omega=omega_matrix(model.dim),
        a_half_inv=jets["a_half_inv"].val)


def frame_residuals(frame: FrameTensors) -> dict:
    """Max-abs residual of every algebraic identity the frame must satisfy.

    Stacked frames are reduced to the worst point.
    """
    n = frame.dim
    Id = np.eye(2 * n)
    Om = frame.omega
    Jp, Jm, g, b = frame.j_plus, frame.j_minus, frame.g, frame.b

    def T(M):
        return np.swapaxes(M, -1, -2)

    def worst(M):
        return float(np.abs(M).max())

    P = np.linalg.inv(frame.phi)
    Ps = 0.5 * (P + T(P))
    det_g = np.linalg.det(g)
    det_rhs = np.linalg.det(Ps) * np.linalg.det(frame.xi)
    return {
        "j_plus_squared": worst(Jp @ Jp + Id),
        "j_minus_squared": worst(Jm @ Jm + Id),
        "metric_from_j": worst(-0.5 * T(Jp + Jm) @ Om - g),
        "b_from_j": worst(-0.5 * T(Jp - Jm) @ Om - b),
        "symplectic_adjoint": worst(T(Jm) @ Om + Om @ Jp),
        "metric_symmetric": worst(g - T(g)),
        "b_antisymmetric": worst(b + T(b)),
        "metric_positive": float(max(0.0, -np.min(np.linalg.eigvalsh(g)[..., 0]))),
        "xi_positive": float(max(0.0, -np.min(np.linalg.eigvalsh(frame.xi)[..., 0]))),
        "det_metric": worst((det_g - det_rhs) / det_rhs),
        "half_sum_inverse": worst(frame.a_half_inv @ (0.5 * (Jp + Jm)) - Id),
        "phi_sym_inverse": worst(T(frame.phi) @ Ps @ frame.phi - frame.phi_s),
    }


@dataclass(frozen=True)
class AdmissibilityReport:
    min_eigenvalue: float
    argmin: list
    n_points: int
    passed: bool

    def as_dict(self) -> dict:
        return {"min_eigenvalue": self.min_eigenvalue, "argmin": self.argmin,
                "n_points": self.n_points, "passed": self.passed}


def validate_params(model: PotentialModel, params: GKParams, grid) -> AdmissibilityReport:
    """Minimum admissibility eigenvalue over ``grid``; failures are reported, not raised."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise ValueError("grid must be nonempty")
    S = model.hessian(grid)
    lam = admissibility_eigenvalues(S, params.F)[:, 0]
    k = int(np.argmin(lam))
    return AdmissibilityReport(float(lam[k]), grid[k].tolist(), int(grid.shape[0]),
                               bool(lam[k] > 0.0))
