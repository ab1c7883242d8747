"""Log-convex weight sequences, their associated weights, and numeric checks.

Submodules: ``sequences`` (class-M conditions), ``conjugates`` (discrete
Legendre transform), ``weights`` (w, w_m, k), ``hfun`` (h, l, class V),
``entire`` (zero sets and canonical products), ``represent`` (exponential
sum fitting) and ``cli``.
"""

from .conjugates import ConvexGridFunction, PsiSpec, legendre_transform
from .errors import InputError, TruncationError
from .sequences import LogSequence, build_sequence
from .weights import WeightFunction, eval_w

__all__ = [
    "ConvexGridFunction",
    "InputError",
    "LogSequence",
    "PsiSpec",
    "TruncationError",
    "WeightFunction",
    "build_sequence",
    "eval_w",
    "legendre_transform",
]

__version__ = "0.1.0"
