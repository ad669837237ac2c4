"""Estimator-style wrappers: a curvature transformer and the cscGK optimizer."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import curvature, optimize
from .frame import validate_params
from .exceptions import InadmissibleParamsError
from .polytope import perturbed_potential
from .validation import check_params, check_points


class ScalarCurvatureTransformer(TransformerMixin, BaseEstimator):
    """Map moment-coordinate points to scalar curvatures.

    Parameters
    ----------
    model : PotentialModel
    C, F : array_like of shape (n, n), optional
        Antisymmetric parameters; zeros when omitted.
    with_ricci : bool, default=False
        Append the symplectic trace of the Ricci form as a third column.

    Attributes
    ----------
    params_ : GKParams
    admissibility_ : AdmissibilityReport
        Minimum admissibility eigenvalue over the fitted points.
    n_features_in_ : int
    """

    def __init__(self, model=None, C=None, F=None, with_ricci=False):
        self.model = model
        self.C = C
        self.F = F
        self.with_ricci = with_ricci

    def fit(self, X, y=None):
        if self.model is None:
            raise ValueError("a PotentialModel is required")
        X = check_points(X, self.model)
        self.params_ = check_params(self.C, self.F, self.model.dim)
        self.admissibility_ = validate_params(self.model, self.params_, X)
        if not self.admissibility_.passed:
            raise InadmissibleParamsError(
                f"parameters inadmissible: min eigenvalue {self.admissibility_.min_eigenvalue:.6g}"
                f" at mu={self.admissibility_.argmin}",
                min_eigenvalue=self.admissibility_.min_eigenvalue,
                point=np.asarray(self.admissibility_.argmin))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_points(X, self.model)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        kb = np.atleast_1d(curvature.kappa_boulanger(self.model, self.params_, X))
        kg = np.atleast_1d(curvature.kappa_goto(self.model, self.params_, X))
        cols = [kb, kg]
        if self.with_ricci:
            cols.append(curvature.kappa_from_ricci(
                curvature.ricci_form(self.model, self.params_, X)))
        return np.column_stack(cols)

    def get_feature_names_out(self, input_features=None):
        names = ["kappa_boulanger", "kappa_goto"]
        if self.with_ricci:
            names.append("kappa_from_ricci")
        return np.array(names, dtype=object)


class CSCOptimizer(BaseEstimator):
    """Fit polynomial corrections to ``tau`` that flatten ``kappa_boulanger``.

    ``fit`` takes the grid the curvature variance is measured on.

    Attributes
    ----------
    coef_ : ndarray of shape (n_terms,)
    report_ : OptReport
    n_iter_ : int
    model_ : PotentialModel
        The corrected potential.
    """

    def __init__(self, model=None, C=None, F=None, multi_indices=((4,),), bounds=None,
                 budget=200):
        self.model = model
        self.C = C
        self.F = F
        self.multi_indices = multi_indices
        self.bounds = bounds
        self.budget = budget

    def fit(self, X, y=None):
        if self.model is None:
            raise ValueError("a PotentialModel is required")
        X = check_points(X, self.model)
        self.params_ = check_params(self.C, self.F, self.model.dim)
        self.basis_ = optimize.PerturbationBasis(self.multi_indices, self.bounds)
        self.report_ = optimize.optimize(self.model, self.params_, X, self.basis_, self.budget)
        self.coef_ = np.array(self.report_.coefficients)
        self.n_iter_ = self.report_.iterations
        self.model_ = perturbed_potential(self.model, self.basis_.terms(self.coef_))
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        """``kappa_boulanger`` of the corrected potential at ``X``."""
        check_is_fitted(self, "coef_")
        X = check_points(X, self.model)
        return np.atleast_1d(curvature.kappa_boulanger(self.model_, self.params_, X))

    def score(self, X, y=None):
        """Negative curvature variance on ``X`` (higher is better)."""
        check_is_fitted(self, "coef_")
        X = check_points(X, self.model)
        return -optimize.csc_objective(self.model, self.params_, X, self.coef_, self.basis_)
