"""Error exponents for joint source-channel coding over a two-user multiple-access
channel with message-dependent (two-class) random coding."""

from .bounds import concave_hull, lower_bound, upper_bound
from .engine import achievable_exponent, big_f, d_value, little_f, solve_thresholds
from .gallager import ErrorType, e_0, e_s, e_s_prime
from .model import (
    ClassPolicy,
    InputDistribution,
    MacChannel,
    ModelError,
    SourceSpec,
    SystemModel,
    parse_model,
    serialize_model,
    validate,
)
from .paperex import FIXTURE_NAME, build_paper_model

__all__ = [
    "ClassPolicy",
    "ErrorType",
    "FIXTURE_NAME",
    "InputDistribution",
    "MacChannel",
    "ModelError",
    "SourceSpec",
    "SystemModel",
    "achievable_exponent",
    "big_f",
    "build_paper_model",
    "concave_hull",
    "d_value",
    "e_0",
    "e_s",
    "e_s_prime",
    "little_f",
    "lower_bound",
    "parse_model",
    "serialize_model",
    "solve_thresholds",
    "upper_bound",
    "validate",
]
