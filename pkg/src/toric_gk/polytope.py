"""Moment polytopes, symplectic potentials and interior sampling grids.

A polytope is stored in facet form ``l_k(mu) = <a_k, mu> - c_k >= 0``.  The
symplectic potentials supported here have closed-form derivatives of every
order, so the geometry downstream never differences numerically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ._jet import Jet
from .exceptions import ConvexityError, DomainError, GridTooCoarseError, PolytopeError

POTENTIAL_KINDS = ("guillemin", "guillemin_plus_polynomial", "quadratic")


@dataclass(frozen=True, eq=False)
class MomentPolytope:
    """Convex polytope ``{mu : A mu - c >= 0}`` with a nonempty bounded interior.

    Parameters
    ----------
    normals : array_like, shape (m, n)
        Facet normals ``a_k`` (rows), pointing into the polytope.
    offsets : array_like, shape (m,)
        Facet offsets ``c_k``.
    """

    normals: np.ndarray
    offsets: np.ndarray
    bounding_box: np.ndarray = field(init=False, repr=False)
    chebyshev_center: np.ndarray = field(init=False, repr=False)
    inradius: float = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        c = np.asarray(self.offsets, dtype=float).reshape(-1)
        if A.shape[1] < 1:
            raise PolytopeError("polytope dimension must be at least 1")
        if A.shape[0] != c.shape[0]:
            raise PolytopeError(
                f"{A.shape[0]} normals but {c.shape[0]} offsets")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0.0):
            raise PolytopeError(f"facet {int(np.argmin(norms))} has a zero normal")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", c)
        object.__setattr__(self, "bounding_box", self._probe_box())
        center, radius = self._chebyshev(norms)
        if radius <= 1e-12:
            raise PolytopeError("polytope interior is empty")
        object.__setattr__(self, "chebyshev_center", center)
        object.__setattr__(self, "inradius", radius)

    @classmethod
    def from_facets(cls, facets) -> "MomentPolytope":
        """Build from a sequence of ``(normal, offset)`` pairs."""
        facets = list(facets)
        if not facets:
            raise PolytopeError("at least one facet is required")
        return cls(np.array([f[0] for f in facets], dtype=float),
                   np.array([f[1] for f in facets], dtype=float))

    @classmethod
    def box(cls, lower, upper) -> "MomentPolytope":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        n = lower.size
        eye = np.eye(n)
        return cls(np.vstack([eye, -eye]), np.concatenate([lower, -upper]))

    @classmethod
    def segment(cls, a: float = 0.0, b: float = 1.0) -> "MomentPolytope":
        return cls.box([a], [b])

    @classmethod
    def simplex(cls, n: int, size: float = 1.0) -> "MomentPolytope":
        """Standard simplex ``{mu_i >= 0, sum mu_i <= size}``."""
        return cls(np.vstack([np.eye(n), -np.ones((1, n))]),
                   np.concatenate([np.zeros(n), [-size]]))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def n_facets(self) -> int:
        return self.normals.shape[0]

    def slack(self, mu) -> np.ndarray:
        """Facet functions ``l_k(mu)``, shape ``(..., m)``."""
        return np.asarray(mu, dtype=float) @ self.normals.T - self.offsets

    def contains(self, mu) -> np.ndarray:
        """True where ``mu`` lies in the open interior."""
        return np.all(self.slack(mu) > 0.0, axis=-1)

    def _probe_box(self) -> np.ndarray:
        n = self.dim
        box = np.empty((n, 2))
        for i in range(n):
            for j, sgn in enumerate((1.0, -1.0)):
                cost = np.zeros(n)
                cost[i] = sgn
                res = linprog(cost, A_ub=-self.normals, b_ub=-self.offsets,
                              bounds=[(None, None)] * n, method="highs")
                if res.status == 2:
                    raise PolytopeError("polytope is empty (infeasible facets)")
                if res.status == 3:
                    raise PolytopeError(
                        f"polytope is unbounded along {'-' if sgn > 0 else '+'}mu_{i + 1}")
                if res.status != 0:
                    raise PolytopeError(f"LP probe failed: {res.message}")
                box[i, j] = sgn * res.fun
        return box

    def _chebyshev(self, norms):
        # max r  s.t.  <a_k, x> - c_k >= r |a_k|
        n = self.dim
        cost = np.zeros(n + 1)
        cost[-1] = -1.0
        A_ub = np.hstack([-self.normals, norms[:, None]])
        res = linprog(cost, A_ub=A_ub, b_ub=-self.offsets,
                      bounds=[(None, None)] * n + [(0, None)], method="highs")
        if res.status != 0:
            raise PolytopeError(f"inradius LP failed: {res.message}")
        return res.x[:n], float(res.x[-1])


def _normalize_perturbation(perturbation, n):
    terms = []
    for powers, coeff in perturbation or ():
        powers = tuple(int(p) for p in np.atleast_1d(powers))
        if len(powers) != n or any(p < 0 for p in powers):
            raise ValueError(f"multi-index {powers} invalid for dimension {n}")
        terms.append((powers, float(coeff)))
    return tuple(terms)


@dataclass(frozen=True, eq=False)
class PotentialModel:
    """Symplectic potential on the interior of a moment polytope.

    ``kind`` selects the base function:

    * ``"guillemin"``: ``1/2 sum_k l_k log l_k``;
    * ``"quadratic"``: ``1/2 |mu|^2``;
    * ``"guillemin_plus_polynomial"``: Guillemin plus ``perturbation``.

    ``perturbation`` is a tuple of ``(multi_index, coefficient)`` monomials
    added to any base.
    """

    polytope: MomentPolytope
    kind: str = "guillemin"
    perturbation: tuple = ()

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "perturbation",
                           _normalize_perturbation(self.perturbation, self.polytope.dim))

    @property
    def dim(self) -> int:
        return self.polytope.dim

    def _base_derivative(self, mu, order):
        n = self.dim
        batch = mu.shape[:-1]
        if self.kind == "quadratic":
            if order == 0:
                return 0.5 * np.sum(mu * mu, axis=-1)
            if order == 1:
                return mu.copy()
            if order == 2:
                return np.broadcast_to(np.eye(n), batch + (n, n)).copy()
            return np.zeros(batch + (n,) * order)
        ell = self.polytope.slack(mu)
        A = self.polytope.normals
        if order == 0:
            return 0.5 * np.sum(ell * np.log(ell), axis=-1)
        if order == 1:
            return 0.5 * (np.log(ell) + 1.0) @ A
        # d^p (l log l) = (-1)^p (p-2)! a^{(x)p} / l^(p-1)  for p >= 2
        weight = 0.5 * (-1.0) ** order * math.factorial(order - 2) / ell ** (order - 1)
        letters = "ijkl"[:order]
        spec = "...m," + ",".join(f"m{c}" for c in letters) + "->..." + letters
        return np.einsum(spec, weight, *([A] * order))

    def _poly_derivative(self, mu, order):
        n = self.dim
        out = np.zeros(mu.shape[:-1] + (n,) * order)
        for powers, coeff in self.perturbation:
            for idx in itertools.product(range(n), repeat=order):
                e = list(powers)
                factor = coeff
                for i in idx:
                    factor *= e[i]
                    e[i] -= 1
                if factor == 0.0:
                    continue
                out[(Ellipsis,) + idx] += factor * np.prod(mu ** np.array(e), axis=-1)
        return out

    def derivatives(self, mu, order: int, check: bool = True) -> np.ndarray:
        """Symmetric tensor of order-``order`` partials of the potential.

        Parameters
        ----------
        mu : array_like, shape (..., n)
        order : int in 0..4

        Returns
        -------
        ndarray, shape ``(..., n, ..., n)`` with ``order`` trailing axes.
        """
        if order not in range(5):
            raise ValueError(f"derivative order must be in 0..4, got {order}")
        mu = self._check_domain(mu)
        if check:
            self.check_convexity(mu)
        return self._base_derivative(mu, order) + self._poly_derivative(mu, order)

    def hessian(self, mu, check: bool = True) -> np.ndarray:
        return self.derivatives(mu, 2, check=check)

    def hessian_jet(self, mu) -> Jet:
        """The Hessian ``phi_s`` with its first and second mu-derivatives."""
        mu = self._check_domain(mu)
        S = self.derivatives(mu, 2)
        T3 = self.derivatives(mu, 3, check=False)
        T4 = self.derivatives(mu, 4, check=False)
        return Jet(S, np.moveaxis(T3, -1, 0), np.moveaxis(T4, (-2, -1), (0, 1)))

    def check_convexity(self, mu) -> None:
        mu = np.asarray(mu, dtype=float)
        S = self._base_derivative(mu, 2) + self._poly_derivative(mu, 2)
        lam = np.linalg.eigvalsh(S)[..., 0]
        bad = np.nonzero(np.atleast_1d(lam <= 0.0))[0]
        if bad.size:
            pts = mu.reshape(-1, self.dim)
            k = int(bad[0])
            raise ConvexityError(
                f"potential Hessian not positive-definite at mu={pts[k].tolist()} "
                f"(min eigenvalue {float(np.atleast_1d(lam)[k]):.3e})",
                point=pts[k], min_eigenvalue=float(np.atleast_1d(lam)[k]))

    def _check_domain(self, mu) -> np.ndarray:
        mu = np.asarray(mu, dtype=float)
        if mu.shape[-1:] != (self.dim,):
            raise DomainError(f"expected points of dimension {self.dim}, got shape {mu.shape}")
        inside = self.polytope.contains(mu)
        if not np.all(inside):
            pts = mu.reshape(-1, self.dim)
            k = int(np.nonzero(~np.atleast_1d(inside).reshape(-1))[0][0])
            raise DomainError(f"mu={pts[k].tolist()} is not in the open polytope")
        return mu


def guillemin_potential(polytope: MomentPolytope) -> PotentialModel:
    """Canonical potential ``1/2 sum_k l_k log l_k`` of ``polytope``."""
    return PotentialModel(polytope, "guillemin")


def quadratic_potential(polytope: MomentPolytope) -> PotentialModel:
    """``1/2 |mu|^2``: constant Hessian, flat geometry."""
    return PotentialModel(polytope, "quadratic")


def perturbed_potential(base: PotentialModel, perturbation) -> PotentialModel:
    """Add polynomial monomials to ``base``.

    ``perturbation`` is an iterable of ``(multi_index, coefficient)`` pairs or a
    mapping ``{multi_index: coefficient}``.  Convexity is re-checked at every
    evaluation point, not here.
    """
    if isinstance(perturbation, dict):
        perturbation = perturbation.items()
    extra = _normalize_perturbation(perturbation, base.dim)
    kind = "guillemin_plus_polynomial" if base.kind != "quadratic" else "quadratic"
    return PotentialModel(base.polytope, kind, base.perturbation + extra)


def tau_derivatives(model: PotentialModel, mu, order: int) -> np.ndarray:
    """Order-``order`` derivative tensor of the potential at ``mu``."""
    return model.derivatives(mu, order)


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid resolution and the interior margin.

    The grid spans the bounding box shrunk by ``margin`` times its width on
    each side; points with ``l_k(mu) < margin * inradius`` are then dropped.
    """

    resolution: int = 21
    margin: float = 0.05

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 1:
            raise ValueError(f"resolution must be a positive integer, got {self.resolution}")
        if not 0.0 < self.margin < 0.5:
            raise ValueError(f"margin must lie in (0, 0.5), got {self.margin}")


def interior_grid(polytope: MomentPolytope, spec: GridSpec) -> np.ndarray:
    """Lexicographically ordered interior sample points, shape ``(m, n)``."""
    axes = []
    for lo, hi in polytope.bounding_box:
        w = hi - lo
        if spec.resolution == 1:
            axes.append(np.array([0.5 * (lo + hi)]))
        else:
            axes.append(np.linspace(lo + spec.margin * w, hi - spec.margin * w, spec.resolution))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    keep = np.all(polytope.slack(pts) >= spec.margin * polytope.inradius, axis=-1)
    pts = pts[keep]
    if pts.shape[0] == 0:
        raise GridTooCoarseError(
            f"no grid point of resolution {spec.resolution} survives margin {spec.margin}")
    return pts
