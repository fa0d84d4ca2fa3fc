"""Conditional density estimators with data-driven smoothing.

Two Goldenshluger-Lepski procedures estimate y -> f(x, y) at a fixed x: a
Gaussian kernel rule with bandwidth selection and a least-squares projection
rule on piecewise polynomial bases with model selection. Both are evaluated
by Monte Carlo on four simulation examples.
"""

__version__ = "0.1.0"

from .evaluation import RiskConfig, RiskReport, estimate_once, mse, oracle_ratio, run_cell  # noqa: E402
from .kernel_gl import Bandwidth2, build_bandwidth_grid, gl_select_bandwidth, kernel_estimate  # noqa: E402
from .marginal import MarginalConfig, MarginalEstimate, gl_select_marginal, oracle_marginal  # noqa: E402
from .projection_gl import BasisSpec, ModelIndex, build_model_grid, fit_projection, gl_select_model  # noqa: E402
from .sampling import ExampleId, ObservationSet, generate, true_conditional_density  # noqa: E402

__all__ = [
    "Bandwidth2",
    "BasisSpec",
    "ExampleId",
    "MarginalConfig",
    "MarginalEstimate",
    "ModelIndex",
    "ObservationSet",
    "RiskConfig",
    "RiskReport",
    "__version__",
    "build_bandwidth_grid",
    "build_model_grid",
    "estimate_once",
    "fit_projection",
    "generate",
    "gl_select_bandwidth",
    "gl_select_marginal",
    "gl_select_model",
    "kernel_estimate",
    "mse",
    "oracle_marginal",
    "oracle_ratio",
    "run_cell",
    "true_conditional_density",
]
