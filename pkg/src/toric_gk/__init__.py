"""Toric generalized Kähler structures of symplectic type.

Build the structure from a symplectic potential on a moment polytope and two
constant antisymmetric matrices, then evaluate its scalar curvature two
independent ways, its Bismut connections, and the spinor algebra behind it.
"""

from .clifford import CliffordAmbient, CliffordElement, FormElement, Spinor, SpinorFrame
from .curvature import (CurvatureSample, RicciFormSample, ScanSummary, det_identity_residuals,
                        equivalence_scan, kappa_boulanger, kappa_from_ricci, kappa_goto,
                        ricci_form)
from .estimators import CSCOptimizer, ScalarCurvatureTransformer
from .exceptions import (ConditioningError, ConvexityError, DomainError, EquivarianceError,
                         GridTooCoarseError, InadmissibleParamsError, PolytopeError,
                         ToricGKError)
from .frame import FrameTensors, GKParams, assemble_frame, frame_residuals, validate_params
from .optimize import OptReport, PerturbationBasis, csc_objective
from .polytope import (GridSpec, MomentPolytope, PotentialModel, guillemin_potential,
                       interior_grid, perturbed_potential, quadratic_potential)

__version__ = "0.1.0"

__all__ = [
    "CSCOptimizer", "CliffordAmbient", "CliffordElement", "ConditioningError",
    "ConvexityError", "CurvatureSample", "DomainError", "EquivarianceError", "FormElement",
    "FrameTensors", "GKParams", "GridSpec", "GridTooCoarseError", "InadmissibleParamsError",
    "MomentPolytope", "OptReport", "PerturbationBasis", "PolytopeError", "PotentialModel",
    "RicciFormSample", "ScalarCurvatureTransformer", "ScanSummary", "Spinor", "SpinorFrame",
    "ToricGKError", "assemble_frame", "csc_objective", "det_identity_residuals",
    "equivalence_scan", "frame_residuals", "guillemin_potential", "interior_grid",
    "kappa_boulanger", "kappa_from_ricci", "kappa_goto", "perturbed_potential",
    "quadratic_potential", "ricci_form", "validate_params",
]
