"""Long-range dependent Gaussian fields, Hermite-rank functionals and their limit laws."""
from .errors import NoncentralError
from .fields import FieldModel, FieldSample, c2, cauchy_model, linnik_model, power_law_model
from .geometry import Window, ball, cube
from .hermite import HermiteExpansion, expand, hermite_eval
from .limit import LimitConfig, SampleBatch, limit_variance, sample_limit
from .rates import RateBound, rate_bound

__version__ = "0.1.0"

__all__ = [
    "NoncentralError", "FieldModel", "FieldSample", "c2", "cauchy_model", "linnik_model",
    "power_law_model", "Window", "ball", "cube", "HermiteExpansion", "expand", "hermite_eval",
    "LimitConfig", "SampleBatch", "limit_variance", "sample_limit", "RateBound", "rate_bound",
]
