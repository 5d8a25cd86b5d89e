"""Parametric low-rank approximation: optimal truncated SVD and POD along a
parameter, branching detection, continuous surrogates and property suites."""

__version__ = "0.1.0"

from .errors import BranchingError, ParamLRError, ValidationError
from .families import ParamFamily, analytic_family, eval_family, grid_family
from .linalg_core import SvdFactors, SymEig, hs_inner, operator_norm, schatten_norm, svd, sym_eig
from .lowrank import (
    CappedSimplexSolution,
    RankNApprox,
    capped_simplex_max,
    frame_energy,
    singular_value,
    truncate,
    von_neumann_slack,
)
from .parametric import (
    ProjectorPath,
    SweepResult,
    align_frames,
    gap_report,
    grid_argmin,
    projector_path,
    sweep_pod,
    sweep_svd,
)
from .stochastic import (
    CoupledEnsemble,
    Ensemble,
    PodBasis,
    covariance,
    covariance_perturbation,
    kkl_coefficients,
    pod,
    projection_error,
)
from .surrogate import CertReport, SurrogateModel, certify, eval_projector, fit_factors, fit_projector
