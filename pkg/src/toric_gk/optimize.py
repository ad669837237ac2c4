"""Search for constant scalar curvature among polynomial perturbations of a potential.

This is a finite-dimensional surrogate for the moment-map picture: the
objective is the variance of ``kappa_boulanger`` over a grid (uniform
weights, since the Liouville measure is uniform in the moment coordinates),
minimized over coefficients of a fixed set of monomials added to ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvature import kappa_boulanger
from .exceptions import ToricGKError
from .frame import GKParams
from .polytope import PotentialModel, perturbed_potential

FD_STEP = 1e-5
OBJECTIVE_TOL = 1e-10
MIN_STEP = 1e-12
ARMIJO = 1e-4


@dataclass(frozen=True)
class PerturbationBasis:
    """Monomials ``mu^alpha`` with box constraints on their coefficients.

    Parameters
    ----------
    multi_indices : sequence of tuple of int
    bounds : sequence of (low, high), optional
        Defaults to unbounded.  Every box must contain 0.
    """

    multi_indices: tuple
    bounds: tuple = None

    def __post_init__(self):
        idx = tuple(tuple(int(p) for p in alpha) for alpha in self.multi_indices)
        if not idx:
            raise ValueError("perturbation basis must be nonempty")
        if len({len(a) for a in idx}) != 1 or any(p < 0 for a in idx for p in a):
            raise ValueError("multi-indices must be nonnegative and of equal length")
        if self.bounds is None:
            bounds = tuple((-np.inf, np.inf) for _ in idx)
        else:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(bounds) != len(idx):
            raise ValueError("one (low, high) pair is needed per multi-index")
        for lo, hi in bounds:
            if not lo <= 0.0 <= hi:
                raise ValueError(f"box ({lo}, {hi}) must contain 0")
        object.__setattr__(self, "multi_indices", idx)
        object.__setattr__(self, "bounds", bounds)

    def __len__(self):
        return len(self.multi_indices)

    @property
    def dim(self) -> int:
        return len(self.multi_indices[0])

    def clip(self, coeffs) -> np.ndarray:
        lo, hi = np.array(self.bounds).T
        return np.clip(coeffs, lo, hi)

    def terms(self, coeffs) -> list:
        return [(alpha, float(c)) for alpha, c in zip(self.multi_indices, coeffs)]


def _kappa(model, params, grid, coeffs, basis):
    if basis is None:
        perturbed = perturbed_potential(model, coeffs)
    else:
        perturbed = perturbed_potential(model, basis.terms(coeffs))
    return np.atleast_1d(kappa_boulanger(perturbed, params, grid))


def csc_objective(model: PotentialModel, params: GKParams, grid, coeffs,
                  basis: PerturbationBasis | None = None) -> float:
    """Variance of ``kappa_boulanger`` over ``grid`` for the perturbed potential.

    ``coeffs`` is either a vector matching ``basis`` or, without a basis, a
    perturbation spec (pairs or mapping of multi-index to coefficient).
    Convexity or admissibility failure anywhere on the grid returns ``inf``.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    try:
        kappa = _kappa(model, params, grid, coeffs, basis)
    except (ToricGKError, np.linalg.LinAlgError):
        return float("inf")
    if not np.all(np.isfinite(kappa)):
        return float("inf")
    return float(np.mean((kappa - kappa.mean()) ** 2))


@dataclass
class OptReport:
    coefficients: list
    objective_history: list
    final_objective: float
    iterations: int
    converged: bool
    reason: str
    kappa_range: float
    multi_indices: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"coefficients": self.coefficients, "multi_indices": self.multi_indices,
                "objective_history": self.objective_history,
                "final_objective": self.final_objective, "iterations": self.iterations,
                "converged": self.converged, "reason": self.reason,
                "kappa_range": self.kappa_range}


def _gradient(fun, x, f0, h=FD_STEP):
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        fp, fm = fun(x + e), fun(x - e)
        if np.isfinite(fp) and np.isfinite(fm):
            g[k] = (fp - fm) / (2 * h)
        elif np.isfinite(fp):
            g[k] = (fp - f0) / h
        elif np.isfinite(fm):
            g[k] = (f0 - fm) / h
    return g


def optimize(model: PotentialModel, params: GKParams, grid, basis: PerturbationBasis,
             budget: int = 200, initial=None) -> OptReport:
    """Finite-difference gradient descent with Armijo backtracking.

    Stops after ``budget`` iterations, when the objective drops below
    ``1e-10``, or when backtracking shrinks the step below ``1e-12`` (a stall,
    reported rather than raised).  The step that succeeded is doubled before
    the next line search.
    """
    if int(budget) != budget or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget}")
    if not isinstance(basis, PerturbationBasis):
        raise TypeError("basis must be a PerturbationBasis")
    if basis.dim != model.dim:
        raise ValueError(f"basis multi-indices have length {basis.dim}, potential {model.dim}")
    grid = np.atleast_2d(np.asarray(grid, dtype=float))

    def fun(c):
        return csc_objective(model, params, grid, basis.clip(c), basis)

    x = basis.clip(np.zeros(len(basis)) if initial is None
                   else np.asarray(initial, dtype=float))
    f = fun(x)
    history = [f]
    step = 1.0
    iterations = 0
    reason = "budget"
    if not np.isfinite(f):
        reason = "barrier"
    elif f < OBJECTIVE_TOL:
        reason = "objective"
    while reason == "budget" and iterations < budget:
        g = _gradient(fun, x, f)
        if not np.any(g):
            reason = "stationary"
            break
        t = step
        while t >= MIN_STEP:
            x_new = basis.clip(x - t * g)
            f_new = fun(x_new)
            if np.isfinite(f_new) and f_new <= f + ARMIJO * g @ (x_new - x) and f_new < f:
                break
            t *= 0.5
        else:
            reason = "step"
            break
        x, f = x_new, f_new
        history.append(f)
        iterations += 1
        step = 2.0 * t
        if f < OBJECTIVE_TOL:
            reason = "objective"
    if np.isfinite(f):
        kappa = _kappa(model, params, grid, x, basis)
        spread = float(kappa.max() - kappa.min())
    else:
        spread = float("inf")
    return OptReport(coefficients=[float(c) for c in x], objective_history=history,
                     final_objective=float(f), iterations=iterations,
                     converged=reason == "objective", reason=reason, kappa_range=spread,
                     multi_indices=[list(a) for a in basis.multi_indices])
