"""Dense operators and states on spin, path and momentum-grid factors.

Deformations depend on momentum only through ``pi^2``, and spin commutes
with momentum, so the momentum factor is a finite set of magnitudes on which
every momentum function is diagonal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from numbers import Number

import numpy as np
from scipy import special

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .deformation import DeformationModel, f_of
from .errors import DomainError, SpaceMismatchError

MAX_DIM = 2**14
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

_AXES = {"x": 0, "y": 1, "z": 2}


def axis_index(axis) -> int:
    if isinstance(axis, str):
        try:
            return _AXES[axis.lower()]
        except KeyError:
            raise ValueError(f"unknown axis {axis!r}") from None
    if axis in (0, 1, 2):
        return int(axis)
    raise ValueError(f"unknown axis {axis!r}")


@dataclass(frozen=True)
class HilbertSpace:
    factors: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"factor labels must be unique, got {labels}")
        if any(dim < 1 for _, dim in factors):
            raise ValueError("factor dimensions must be positive")
        if self.total_dim > MAX_DIM:
            raise ValueError(f"total dimension {self.total_dim} exceeds {MAX_DIM}")

    @classmethod
    def of(cls, *factors: tuple[str, int]) -> HilbertSpace:
        return cls(tuple(factors))

    @property
    def total_dim(self) -> int:
        return math.prod(dim for _, dim in self.factors)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    def tensor(self, other: HilbertSpace) -> HilbertSpace:
        return HilbertSpace(self.factors + other.factors)


def _frozen(array, dtype=complex) -> np.ndarray:
    arr = np.array(array, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OperatorRep:
    space: HilbertSpace
    matrix: np.ndarray
    hermitian: bool | None = None

    def __post_init__(self) -> None:
        m = _frozen(self.matrix)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise SpaceMismatchError(f"matrix shape {m.shape} does not match dimension {n}")
        object.__setattr__(self, "matrix", m)
        deviation = np.max(np.abs(m - m.conj().T)) if n else 0.0
        if self.hermitian is None:
            object.__setattr__(self, "hermitian", bool(deviation < HERMITIAN_TOL))
        elif self.hermitian and deviation >= HERMITIAN_TOL:
            raise ValueError(f"operator flagged Hermitian but |M - M^dag|_max = {deviation:.3g}")

    def _check(self, other: OperatorRep) -> None:
        if self.space != other.space:
            raise SpaceMismatchError(f"{self.space.labels} vs {other.space.labels}")

    def __matmul__(self, other: OperatorRep) -> OperatorRep:
        self._check(other)
        return OperatorRep(self.space, self.matrix @ other.matrix)

    def __add__(self, other: OperatorRep) -> OperatorRep:
        self._check(other)
        return OperatorRep(self.space, self.matrix + other.matrix)

    def __sub__(self, other: OperatorRep) -> OperatorRep:
        self._check(other)
        return OperatorRep(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: Number) -> OperatorRep:
        if not isinstance(scalar, Number):
            return NotImplemented
        return OperatorRep(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> OperatorRep:
        return OperatorRep(self.space, -self.matrix, self.hermitian)

    def tensor(self, other: OperatorRep) -> OperatorRep:
        return OperatorRep(self.space.tensor(other.space), np.kron(self.matrix, other.matrix))

    def dagger(self) -> OperatorRep:
        return OperatorRep(self.space, self.matrix.conj().T)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix)))


def identity(space: HilbertSpace) -> OperatorRep:
    return OperatorRep(space, np.eye(space.total_dim), hermitian=True)


@dataclass(frozen=True, eq=False)
class QuantumState:
    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape != (self.space.total_dim,):
            raise SpaceMismatchError(
                f"{amps.size} amplitudes for a space of dimension {self.space.total_dim}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state is not normalized: <psi|psi> = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, space: HilbertSpace, amplitudes) -> QuantumState:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise DomainError("cannot normalize the zero vector")
        return cls(space, amps / norm)

    def tensor(self, other: QuantumState) -> QuantumState:
        return QuantumState(self.space.tensor(other.space), np.kron(self.amplitudes, other.amplitudes))

    def inner(self, other: QuantumState) -> complex:
        if self.space != other.space:
            raise SpaceMismatchError(f"{self.space.labels} vs {other.space.labels}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def apply(self, op: OperatorRep) -> QuantumState:
        """Apply a unitary; raises if the result is not normalized."""
        if self.space != op.space:
            raise SpaceMismatchError(f"{self.space.labels} vs {op.space.labels}")
        return QuantumState(self.space, op.matrix @ self.amplitudes)


class DistributionKind(str, enum.Enum):
    MONOENERGETIC = "monoenergetic"
    GAUSSIAN_RADIAL = "gaussian_radial"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class MomentumDistribution:
    """Weighted set of momentum magnitudes (GeV) standing in for a beam."""

    magnitudes: np.ndarray
    weights: np.ndarray
    kind: DistributionKind = DistributionKind.CUSTOM
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        mags = _frozen(np.atleast_1d(self.magnitudes), dtype=float)
        w = _frozen(np.atleast_1d(self.weights), dtype=float)
        if mags.ndim != 1 or mags.shape != w.shape or mags.size == 0:
            raise DomainError("magnitudes and weights must be equal-length non-empty 1D arrays")
        if np.any(~np.isfinite(mags)) or np.any(mags < 0):
            raise DomainError("momentum magnitudes must be finite and non-negative")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise DomainError("weights must be finite and non-negative")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise DomainError(f"weights sum to {math.fsum(w)!r}, not 1")
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "kind", DistributionKind(self.kind))

    @classmethod
    def point(cls, pi_GeV: float) -> MomentumDistribution:
        return cls([pi_GeV], [1.0], DistributionKind.MONOENERGETIC, label=f"point:pi={pi_GeV!r}")

    @classmethod
    def monoenergetic(cls, M_GeV: float, E_kin_GeV: float) -> MomentumDistribution:
        """Non-relativistic beam with ``|pi| = sqrt(2 M E_kin)``."""
        if not (M_GeV > 0 and E_kin_GeV >= 0):
            raise DomainError(f"need M > 0 and E_kin >= 0, got {M_GeV}, {E_kin_GeV}")
        pi = math.sqrt(2.0 * M_GeV * E_kin_GeV)
        return cls([pi], [1.0], DistributionKind.MONOENERGETIC,
                   label=f"mono:M={M_GeV!r},E_kin={E_kin_GeV!r}")

    @classmethod
    def gaussian_radial(cls, sigma_GeV: float, n_points: int = 32) -> MomentumDistribution:
        """Isotropic 3D Gaussian wavepacket reduced to its radial magnitude.

        Nodes come from generalized Gauss-Laguerre quadrature (alpha = 1/2) in
        ``x = pi^2 / (2 sigma^2)``, which integrates every even moment
        ``<pi^(2k)>`` with ``k < n_points`` exactly.
        """
        if not sigma_GeV > 0 or n_points < 1:
            raise DomainError("need sigma > 0 and n_points >= 1")
        x, w = special.roots_genlaguerre(n_points, 0.5)
        w = w / math.fsum(w)
        return cls(sigma_GeV * np.sqrt(2.0 * x), w, DistributionKind.GAUSSIAN_RADIAL,
                   label=f"gauss:sigma={sigma_GeV!r},n={n_points}")

    @classmethod
    def custom(cls, pairs, normalize: bool = False) -> MomentumDistribution:
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        w = arr[:, 1]
        if normalize:
            total = math.fsum(w)
            if not total > 0:
                raise DomainError("weights must have positive sum")
            w = w / total
        return cls(arr[:, 0], w, DistributionKind.CUSTOM, label=f"custom:n={len(arr)}")

    @property
    def size(self) -> int:
        return int(self.magnitudes.size)

    @property
    def dist_id(self) -> str:
        return self.label or f"{self.kind.value}:n={self.size}"

    def moment(self, n: float) -> float:
        """``<|pi|^n>`` in GeV^n."""
        return math.fsum(self.weights * self.magnitudes**n) / math.fsum(self.weights)

    def u_values(self, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
        return constants.dimensionless_u(self.magnitudes)

    def space(self, label: str = "momentum") -> HilbertSpace:
        return HilbertSpace.of((label, self.size))

    def state(self, phases=None, label: str = "momentum") -> QuantumState:
        """Momentum state with ``|amplitude_n|^2 = weight_n``."""
        amps = np.sqrt(self.weights).astype(complex)
        if phases is not None:
            amps = amps * np.exp(1j * np.asarray(phases, dtype=float))
        return QuantumState.normalized(self.space(label), amps)


def spin_operators(dim: int = 2, label: str = "spin") -> tuple[OperatorRep, OperatorRep, OperatorRep]:
    """Spin-1/2 operators ``S_i = sigma_i / 2`` (hbar = 1)."""
    if dim != 2:
        raise ValueError(f"only spin-1/2 (dim = 2) is supported, got {dim}")
    space = HilbertSpace.of((label, 2))
    return tuple(OperatorRep(space, 0.5 * p, hermitian=True) for p in PAULIS)


def _f_diagonal(model: DeformationModel, dist: MomentumDistribution,
                constants: PhysicalConstants) -> np.ndarray:
    return np.atleast_1d(f_of(model, dist.u_values(constants)))


def momentum_function(values, dist: MomentumDistribution, label: str = "momentum") -> OperatorRep:
    return OperatorRep(dist.space(label), np.diag(np.asarray(values, dtype=complex)))


def deformation_operator(model: DeformationModel, dist: MomentumDistribution,
                         constants: PhysicalConstants = DEFAULT_CONSTANTS) -> OperatorRep:
    """``1_spin (x) f(pi^2)`` on the spin (x) momentum space."""
    spin_id = identity(HilbertSpace.of(("spin", 2)))
    return spin_id.tensor(momentum_function(_f_diagonal(model, dist, constants), dist))


def deformed_spin(model: DeformationModel, dist: MomentumDistribution, axis,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> OperatorRep:
    """Physical spin ``s_i = S_i (x) f(pi^2)``."""
    S = spin_operators()[axis_index(axis)]
    return S.tensor(momentum_function(_f_diagonal(model, dist, constants), dist))


def undeformed_spin(dist: MomentumDistribution, axis) -> OperatorRep:
    """``S_i (x) 1`` built without any deformation model."""
    S = spin_operators()[axis_index(axis)]
    return S.tensor(identity(dist.space()))


def physical_momentum(dist: MomentumDistribution) -> OperatorRep:
    return momentum_function(dist.magnitudes, dist)


def canonical_momentum(model: DeformationModel, dist: MomentumDistribution,
                       constants: PhysicalConstants = DEFAULT_CONSTANTS) -> OperatorRep:
    """Canonical magnitude ``Pi = pi / f(pi^2)``, diagonal on the momentum factor."""
    return momentum_function(dist.magnitudes / _f_diagonal(model, dist, constants), dist)


def commutator(A: OperatorRep, B: OperatorRep) -> OperatorRep:
    if A.space != B.space:
        raise SpaceMismatchError(f"{A.space.labels} vs {B.space.labels}")
    return OperatorRep(A.space, A.matrix @ B.matrix - B.matrix @ A.matrix)


def expectation(state: QuantumState, A: OperatorRep):
    """``<psi|A|psi>``; a float when ``A`` is Hermitian."""
    if state.space != A.space:
        raise SpaceMismatchError(f"{state.space.labels} vs {A.space.labels}")
    value = complex(np.vdot(state.amplitudes, A.matrix @ state.amplitudes))
    if not A.hermitian:
        return value
    scale = max(1.0, A.max_abs())
    if abs(value.imag) > HERMITIAN_TOL * scale:
        raise ArithmeticError(f"Hermitian expectation has imaginary part {value.imag:.3g}")
    return value.real


def spin_state(theta: float, phi: float = 0.0, label: str = "spin") -> QuantumState:
    """Bloch-sphere spin state ``cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>``."""
    amps = [math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)]
    return QuantumState.normalized(HilbertSpace.of((label, 2)), amps)
