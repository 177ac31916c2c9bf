"""Weighted sectional curvature toolkit for Riemannian manifolds with density."""

from .comparison import (
    THEOREM_IDS,
    ComparisonVerdict,
    conjugate_radius_verdict,
    diameter_verdict,
    index_ode_first_zero,
    index_ode_verdict,
    mean_curvature_check,
    pinching_window_check,
    riccati_trace,
    weighted_monotonicity_check,
)
from .config import EXPERIMENT_IDS, ExperimentConfig, load_config, load_manifest
from .errors import (
    ConfigError,
    ExperimentError,
    GeometryError,
    HypothesisFailed,
    ModelError,
)
from .geodesics import GeodesicPath, JacobiMatrixSolution, integrate_geodesic, integrate_jacobi
from .index_form import IndexFormEvaluation, index_form, synge_variation
from .kernels import BACKEND
from .killing import (
    KillingCandidate,
    WeightedNormScalar,
    classical_identities_check,
    killing_residual,
    weighted_hessian_check,
    zero_locator,
)
from .manifold import GeneralField, GradientDensity, ManifoldWithDensity, OrthonormalPair, orthonormal_pair
from .models import build_model, make_cigar, make_perturbed_sphere, make_space_form, make_zero_secbar
from .report import RunReport
from .runner import run, suite
from .weighted import (
    BakryEmeryRicci,
    WeightedCurvatureSample,
    bakry_emery_ricci,
    conformal_image,
    directional_operator,
    weighted_sec,
)

__version__ = "0.1.0"
