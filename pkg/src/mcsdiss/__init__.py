"""Maxwell-Chern-Simons dissipative model for planar harmonic oscillators."""
__version__ = "0.1.0"

from .errors import (AccuracyError, DomainError, GapError, MCSError, RangeError,
                     RegimeError, RegularizationError)
from .spectral import ModelParams
from .single_osc import SOParams
from .quad import QuadSpec

__all__ = [
    "__version__",
    "MCSError",
    "DomainError",
    "RangeError",
    "AccuracyError",
    "RegimeError",
    "RegularizationError",
    "GapError",
    "ModelParams",
    "SOParams",
    "QuadSpec",
]
