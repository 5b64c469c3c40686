"""Bounds, closed forms and simulation for the two-agent CEO problem with an eavesdropper."""

from .errors import (
    CardinalityError,
    DimensionMismatch,
    EnumerationCapExceeded,
    InfeasibleDistortion,
    MarkovViolation,
)
from .probcore import JointDist, SourceSpec, chain_join, check_markov, entropy, marginal, mutual_info
from .regions import AuxConfig, BoundEval, RegionPoint, corner_points, eval_inner, eval_outer

__version__ = "0.1.0"

__all__ = [
    "AuxConfig", "BoundEval", "CardinalityError", "DimensionMismatch", "EnumerationCapExceeded",
    "InfeasibleDistortion", "JointDist", "MarkovViolation", "RegionPoint", "SourceSpec", "chain_join",
    "check_markov", "corner_points", "entropy", "eval_inner", "eval_outer", "marginal", "mutual_info",
]
