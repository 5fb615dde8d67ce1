"""Relative corrections and deformation-parameter bounds from beam kinematics."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .correction import CorrectionValue
from .deformation import DeformationModel, ModelKind, expectation_f
from .errors import DomainError
from .hilbert import MomentumDistribution

NONRELATIVISTIC_RATIO = 0.2

MUON_MASS_GEV = 0.1
NEUTRON_MASS_GEV = 1.0


class RelativisticBeamWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BeamSpec:
    M_GeV: float
    E_kin_GeV: float
    N_constituents: int = 1
    alpha_scaling: float = 2.0

    def __post_init__(self) -> None:
        if not self.M_GeV > 0 or not self.E_kin_GeV > 0:
            raise DomainError(f"beam needs M > 0 and E_kin > 0, got {self.M_GeV}, {self.E_kin_GeV}")
        if int(self.N_constituents) != self.N_constituents or self.N_constituents < 1:
            raise DomainError(f"N_constituents must be a positive integer, got {self.N_constituents}")
        if self.E_kin_GeV / self.M_GeV >= NONRELATIVISTIC_RATIO:
            warnings.warn(
                f"E_kin/M = {self.E_kin_GeV / self.M_GeV:.3g} >= {NONRELATIVISTIC_RATIO}; "
                "|pi| = sqrt(2 M E_kin) is no longer accurate",
                RelativisticBeamWarning, stacklevel=2,
            )

    @property
    def momentum_GeV(self) -> float:
        return math.sqrt(2.0 * self.M_GeV * self.E_kin_GeV)

    def distribution(self) -> MomentumDistribution:
        return MomentumDistribution.monoenergetic(self.M_GeV, self.E_kin_GeV)


def _check_power(power: int) -> None:
    if power not in (1, 2):
        raise DomainError(f"witness power must be 1 or 2, got {power}")


def delta_S(model: DeformationModel, beam: BeamSpec, witness_power: int = 2,
            constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """``(S_MLQM - S_QM)/S_QM = <f^power> - 1`` for a monoenergetic beam."""
    _check_power(witness_power)
    return expectation_f(model, beam.distribution(), witness_power, constants).epsilon


def delta_S_value(model: DeformationModel, beam: BeamSpec, witness_power: int = 2,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> CorrectionValue:
    _check_power(witness_power)
    return expectation_f(model, beam.distribution(), witness_power, constants)


def linear_model_rhs(beta_l: float, beam: BeamSpec,
                     constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """``beta_l sqrt(2 M E_kin) / m_p``, the alternative bookkeeping for ``<f^2> - 1``.

    It equals the power-1 correction of ``f = 1 + beta_l sqrt(u)`` and is half
    the honest first-order ``<f^2> - 1``.
    """
    return beta_l * beam.momentum_GeV / constants.m_p_GeV


@dataclass(frozen=True)
class BoundReport:
    model: str
    M_GeV: float
    E_kin_GeV: float
    power: int
    delta: float
    epsilon: float
    beta_bound: float
    beta_bound_exact: float
    N: int
    alpha: float
    beta_effective: float

    def to_dict(self) -> dict:
        return asdict(self)


def _kinematic_scale(kind: ModelKind, beam: BeamSpec, constants: PhysicalConstants) -> float:
    """``sqrt(u)`` for the linear model and ``u`` for the quadratic one."""
    ratio = beam.momentum_GeV / constants.m_p_GeV
    if kind is ModelKind.LINEAR:
        return ratio
    if kind is ModelKind.QUADRATIC:
        return ratio * ratio
    raise DomainError(f"bounds are defined for linear and quadratic models, not {kind}")


def invert_bound(kind, beam: BeamSpec, witness_power: int = 1, delta_precision: float = 1.0,
                 constants: PhysicalConstants = DEFAULT_CONSTANTS) -> BoundReport:
    """Largest ``beta`` with ``<f^power> - 1 <= delta``.

    ``beta_bound`` is the first-order solution ``delta / (power * x)`` with
    ``x = sqrt(u)`` (linear) or ``u`` (quadratic). ``beta_bound_exact`` solves
    the truncated model without linearizing, which only differs for
    ``power = 2``. The composite-system factor ``1/N^alpha`` is applied to the
    first-order bound to give ``beta_effective``.
    """
    kind = ModelKind(kind)
    _check_power(witness_power)
    if not delta_precision > 0:
        raise DomainError(f"delta precision must be positive, got {delta_precision}")
    x = _kinematic_scale(kind, beam, constants)
    beta_bound = delta_precision / (witness_power * x)
    if witness_power == 1:
        beta_exact = beta_bound
    else:
        # (1 + beta x)^2 - 1 = delta  ->  beta x = delta / (1 + sqrt(1 + delta))
        beta_exact = delta_precision / (1.0 + math.sqrt(1.0 + delta_precision)) / x
    # correction of the truncated model at the bound; for the quadratic model
    # with power 1 and delta >= 1 this sits at the edge of its validity domain
    y = beta_bound * x
    epsilon = y if witness_power == 1 else y * (2.0 + y)
    return BoundReport(
        model=kind.value,
        M_GeV=beam.M_GeV,
        E_kin_GeV=beam.E_kin_GeV,
        power=witness_power,
        delta=delta_precision,
        epsilon=epsilon,
        beta_bound=beta_bound,
        beta_bound_exact=beta_exact,
        N=int(beam.N_constituents),
        alpha=beam.alpha_scaling,
        beta_effective=composite_scaling(beta_bound, beam.N_constituents, beam.alpha_scaling),
    )


def composite_scaling(beta: float, N: int, alpha: float = 2.0) -> float:
    """Effective deformation ``beta / N^alpha`` of an ``N``-constituent body."""
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    if not alpha >= 0:
        raise DomainError(f"alpha must be non-negative, got {alpha}")
    return beta / float(N) ** alpha
