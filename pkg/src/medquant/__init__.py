"""Distribution-free median intervals, width theory and generalized HulC."""

from .binom import c_n_alpha, c_n_alpha_sandwich, z_half
from .errors import PreconditionError
from .ghulc import GhulcConfig, ghulc_ci, hulc_ci
from .medci import ConfidenceInterval, Method, Sample, median_ci_exact, median_ci_hoeffding
from .width import NonStdParams, g_transform, sample_limit_law

__all__ = [
    "ConfidenceInterval",
    "GhulcConfig",
    "Method",
    "NonStdParams",
    "PreconditionError",
    "Sample",
    "c_n_alpha",
    "c_n_alpha_sandwich",
    "g_transform",
    "ghulc_ci",
    "hulc_ci",
    "median_ci_exact",
    "median_ci_hoeffding",
    "sample_limit_law",
    "z_half",
]

__version__ = "0.1.0"
