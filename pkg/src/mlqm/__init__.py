"""Minimal-length quantum mechanics: deformed spin, CHSH and neutron-interferometry witnesses."""

from .correction import CorrectionValue
from .deformation import (
    DeformationModel,
    ModelKind,
    commutativity_condition,
    expectation_f,
    f_excess,
    f_of,
    g_of,
    gup_bound,
    minimal_length,
)
from .errors import DomainError, MLQMError, SingularityError, SpaceMismatchError
from .hilbert import MomentumDistribution

__all__ = [
    "CorrectionValue",
    "DeformationModel",
    "DomainError",
    "MLQMError",
    "ModelKind",
    "MomentumDistribution",
    "SingularityError",
    "SpaceMismatchError",
    "commutativity_condition",
    "expectation_f",
    "f_excess",
    "f_of",
    "g_of",
    "gup_bound",
    "minimal_length",
]
