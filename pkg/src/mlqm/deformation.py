"""Deformation function ``f``, its Jacobi partner ``g`` and the GUP minimum.

Every model is written in the dimensionless variable ``u = pi^2 / m_p^2``
as ``f(u) = 1 + h * sqrt(u) + sum_{k>=1} c_k u^k``. The linear model uses
only the half-power coefficient ``h``; the quadratic model only ``c_1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy import optimize

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .correction import CorrectionValue
from .errors import DomainError, SingularityError

if TYPE_CHECKING:
    from .hilbert import MomentumDistribution

MAX_ORDER = 8
# relative tolerance for the numerical consistency-limit search
U_MAX_RTOL = 1e-12
_SCAN_GRID = np.geomspace(1e-12, 1e12, 2401)


class ModelKind(str, enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DeformationModel:
    """Immutable description of ``f``.

    Use the :meth:`linear`, :meth:`quadratic` and :meth:`custom`
    constructors rather than filling the fields by hand. ``u_max`` is the
    end of the validity domain; when left as ``None`` it is derived from the
    commutativity condition ``2 (log f)' u < 1``.
    """

    kind: ModelKind
    beta: float = 0.0
    series_c: tuple[float, ...] = (1.0,)
    half_power: float = 0.0
    u_max: float | None = None
    _consistency_limit: float = field(init=False, repr=False, compare=False, default=math.inf)

    def __post_init__(self) -> None:
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        coeffs = tuple(float(c) for c in self.series_c)
        object.__setattr__(self, "series_c", coeffs)
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "half_power", float(self.half_power))
        if not coeffs or coeffs[0] != 1.0:
            raise DomainError(f"series must start with c0 = 1, got {coeffs[:1]}")
        if len(coeffs) - 1 > MAX_ORDER:
            raise DomainError(f"series order {len(coeffs) - 1} exceeds {MAX_ORDER}")
        if not all(math.isfinite(c) for c in (*coeffs, self.beta, self.half_power)):
            raise DomainError("deformation coefficients must be finite")

        if kind is ModelKind.LINEAR and (coeffs != (1.0,) or self.half_power != self.beta):
            raise DomainError("linear model is f = 1 + beta*sqrt(u); use DeformationModel.linear")
        if kind is ModelKind.QUADRATIC and coeffs != (1.0, self.beta) and not (
            self.beta == 0.0 and coeffs == (1.0,)
        ):
            raise DomainError("quadratic model is f = 1 + beta*u; use DeformationModel.quadratic")

        limit = _consistency_limit(self)
        object.__setattr__(self, "_consistency_limit", limit)
        if self.u_max is None:
            object.__setattr__(self, "u_max", limit)
        else:
            u_max = float(self.u_max)
            if not u_max > 0:
                raise DomainError(f"u_max must be positive, got {u_max}")
            if u_max > limit * (1 + U_MAX_RTOL):
                raise DomainError(
                    f"u_max={u_max:.6g} exceeds the commutativity limit {limit:.6g} of this model"
                )
            object.__setattr__(self, "u_max", u_max)

    @classmethod
    def linear(cls, beta: float, u_max: float | None = None) -> DeformationModel:
        return cls(ModelKind.LINEAR, beta=beta, series_c=(1.0,), half_power=beta, u_max=u_max)

    @classmethod
    def quadratic(cls, beta: float, u_max: float | None = None) -> DeformationModel:
        return cls(ModelKind.QUADRATIC, beta=beta, series_c=(1.0, beta), u_max=u_max)

    @classmethod
    def custom(
        cls, series_c, half_power: float = 0.0, u_max: float | None = None
    ) -> DeformationModel:
        return cls(ModelKind.CUSTOM, series_c=tuple(series_c), half_power=half_power, u_max=u_max)

    @classmethod
    def undeformed(cls) -> DeformationModel:
        return cls.quadratic(0.0)

    @property
    def is_trivial(self) -> bool:
        return self.half_power == 0.0 and all(c == 0.0 for c in self.series_c[1:])

    @property
    def model_id(self) -> str:
        if self.kind is ModelKind.CUSTOM:
            terms = ",".join(repr(c) for c in self.series_c)
            return f"custom:c=[{terms}]:h={self.half_power!r}"
        return f"{self.kind.value}:beta={self.beta!r}"

    def to_config(self) -> dict:
        cfg = {"kind": self.kind.value, "beta": self.beta, "series_c": list(self.series_c)}
        if self.kind is ModelKind.CUSTOM:
            cfg["half_power"] = self.half_power
        if math.isfinite(self.u_max):
            cfg["u_max"] = self.u_max
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> DeformationModel:
        kind = ModelKind(cfg["kind"])
        u_max = cfg.get("u_max")
        if kind is ModelKind.LINEAR:
            return cls.linear(cfg["beta"], u_max=u_max)
        if kind is ModelKind.QUADRATIC:
            return cls.quadratic(cfg["beta"], u_max=u_max)
        return cls.custom(cfg["series_c"], half_power=cfg.get("half_power", 0.0), u_max=u_max)


def _as_u(u):
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("u = pi^2/m_p^2 must be non-negative")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _excess(model: DeformationModel, u):
    """``f(u) - 1`` evaluated from the non-constant terms only."""
    acc = np.zeros_like(u)
    for c in reversed(model.series_c[1:]):
        acc = (acc + c) * u
    if model.half_power:
        acc = acc + model.half_power * np.sqrt(u)
    return acc


def _u_fprime(model: DeformationModel, u):
    """``u * df/du``; finite at ``u = 0`` even with a half-power term."""
    acc = np.zeros_like(u)
    for k in range(len(model.series_c) - 1, 0, -1):
        acc = (acc + k * model.series_c[k]) * u
    if model.half_power:
        acc = acc + 0.5 * model.half_power * np.sqrt(u)
    return acc


def _check_domain(model: DeformationModel, u) -> None:
    if np.any(u > model.u_max):
        raise DomainError(f"u exceeds the validity cutoff u_max={model.u_max:.6g} of {model.model_id}")


def f_excess(model: DeformationModel, u):
    """``f(u) - 1`` without forming ``1 + tiny``."""
    arr = _as_u(u)
    _check_domain(model, arr)
    return _out(_excess(model, arr))


def f_of(model: DeformationModel, u):
    """Deformation function ``f(u)``; ``f(0) == 1`` exactly."""
    arr = _as_u(u)
    _check_domain(model, arr)
    return _out(1.0 + _excess(model, arr))


def f_correction(model: DeformationModel, u: float) -> CorrectionValue:
    return CorrectionValue(1.0, f_excess(model, u))


def log_derivative(model: DeformationModel, u):
    """``d log f / du`` from the series; undefined at ``u = 0`` for half-power terms."""
    arr = _as_u(u)
    f = 1.0 + _excess(model, arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _out(_u_fprime(model, arr) / arr / f)


def commutativity_condition(model: DeformationModel, u):
    """Signed margin ``1 - 2 u (log f)'``; positive where the model is consistent."""
    arr = _as_u(u)
    exc = _excess(model, arr)
    ufp = _u_fprime(model, arr)
    return _out((1.0 + (exc - 2.0 * ufp)) / (1.0 + exc))


def g_of(model: DeformationModel, u):
    """Jacobi partner ``g = 2 u f' / (1 - 2 u (log f)')``, so ``g(0) = 0``."""
    arr = _as_u(u)
    margin = commutativity_condition(model, arr)
    if np.any(np.asarray(margin) <= 1e-14):
        raise SingularityError(
            f"commutativity margin vanishes for {model.model_id}; g diverges at u >= {model.u_max:.6g}"
        )
    return _out(2.0 * _u_fprime(model, arr) / margin)


def _consistency_limit(model: DeformationModel) -> float:
    """Smallest ``u > 0`` where ``f`` or the margin numerator ``f - 2uf'`` vanishes."""
    if model.kind is ModelKind.QUADRATIC:
        b = model.beta
        return math.inf if b == 0 else 1.0 / abs(b)
    if model.kind is ModelKind.LINEAR:
        b = model.beta
        return math.inf if b >= 0 else 1.0 / (b * b)

    def numerator(u):
        return 1.0 + (_excess(model, u) - 2.0 * _u_fprime(model, u))

    def f(u):
        return 1.0 + _excess(model, u)

    roots = []
    for fn in (numerator, f):
        vals = fn(_SCAN_GRID)
        bad = np.nonzero(vals <= 0)[0]
        if bad.size == 0:
            continue
        i = int(bad[0])
        if i == 0:
            lo, hi = 0.0, float(_SCAN_GRID[0])
        else:
            lo, hi = float(_SCAN_GRID[i - 1]), float(_SCAN_GRID[i])
        if fn(np.asarray(hi)) == 0:
            roots.append(hi)
            continue
        root = optimize.bisect(lambda x: float(fn(np.asarray(x))), lo, hi,
                               xtol=1e-300, rtol=U_MAX_RTOL, maxiter=2000)
        roots.append(root)
    return min(roots) if roots else math.inf


def gup_bound(beta: float, delta_pi: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Leading-order position uncertainty floor ``(1 + 3 beta (dpi/m_p)^2) / (2 dpi)`` in GeV^-1."""
    if not beta > 0 or not delta_pi > 0:
        raise DomainError(f"gup_bound needs beta > 0 and delta_pi > 0, got {beta}, {delta_pi}")
    t = delta_pi / constants.m_p_GeV
    return (1.0 + 3.0 * beta * t * t) / (2.0 * delta_pi)


class MinimalLength(NamedTuple):
    delta_pi_star: float
    delta_x_min: float


def minimal_length(beta: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> MinimalLength:
    """Locate the global minimum of :func:`gup_bound` numerically.

    The search runs on ``log(dpi/m_p)``; the stationary point is then
    polished with a bracketing root solve of the derivative numerator and
    cross-checked against ``sqrt(3 beta)/m_p``.
    """
    if not beta > 0:
        raise DomainError(f"no minimal length for beta <= 0 (bound is monotone), got {beta}")
    m_p = constants.m_p_GeV

    def scaled(log_t: float) -> float:
        t = math.exp(log_t)
        return (1.0 + 3.0 * beta * t * t) / (2.0 * t)

    guess = optimize.minimize_scalar(scaled, bracket=(-60.0, 0.0, 60.0), method="brent", tol=1e-10)
    t0 = math.exp(guess.x)
    # d/dt of the scaled bound has the sign of 3 beta t^2 - 1
    t_star = optimize.brentq(lambda t: 3.0 * beta * t * t - 1.0, t0 / 2.0, t0 * 2.0,
                             xtol=1e-300, rtol=4 * np.finfo(float).eps)
    dpi_star = t_star * m_p
    dx_min = gup_bound(beta, dpi_star, constants)

    closed = math.sqrt(3.0 * beta) / m_p
    if abs(dx_min - closed) > 1e-9 * closed:
        raise ArithmeticError(f"numerical minimum {dx_min} disagrees with closed form {closed}")
    return MinimalLength(dpi_star, dx_min)


def expectation_f(
    model: DeformationModel,
    dist: MomentumDistribution,
    power: int = 1,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> CorrectionValue:
    """``<f^power>`` over a momentum distribution, returned as ``(1, epsilon)``.

    ``f^2 - 1 = 2e + e^2`` with ``e = f - 1``, so the constant term is never
    added to the tiny ones.
    """
    if power not in (1, 2):
        raise DomainError(f"power must be 1 or 2, got {power}")
    u = constants.dimensionless_u(np.asarray(dist.magnitudes, dtype=float))
    exc = np.asarray(f_excess(model, u), dtype=float)
    terms = exc if power == 1 else exc * (2.0 + exc)
    w = np.asarray(dist.weights, dtype=float)
    eps = math.fsum(w * terms) / math.fsum(w)
    return CorrectionValue(1.0, eps)
