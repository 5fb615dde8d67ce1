"""Two-party CHSH correlations, settings search and the deformed Tsirelson bound.

Dichotomous observables are ``n . sigma`` (eigenvalues +-1), i.e. twice the
spin operator. The deformation enters every correlation through the same
scalar ``<f^2>``, so it is carried as a :class:`CorrectionValue` on ``S``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .correction import CorrectionValue
from .deformation import DeformationModel, expectation_f
from .errors import SpaceMismatchError
from .hilbert import PAULIS, HilbertSpace, MomentumDistribution, OperatorRep, QuantumState, expectation

TSIRELSON = 2.0 * math.sqrt(2.0)
UNIT_TOL = 1e-12
GRID_POINTS = 24
TWO_QUBITS = HilbertSpace.of(("A", 2), ("B", 2))


@dataclass(frozen=True)
class MeasurementSetting:
    vector: tuple[float, float, float]
    party: str = "A"

    def __post_init__(self) -> None:
        v = tuple(float(x) for x in self.vector)
        if len(v) != 3:
            raise ValueError("setting vector must have three components")
        if abs(math.sqrt(sum(x * x for x in v)) - 1.0) > UNIT_TOL:
            raise ValueError(f"setting vector {v} is not a unit vector")
        if self.party not in ("A", "B"):
            raise ValueError(f"party must be 'A' or 'B', got {self.party!r}")
        object.__setattr__(self, "vector", v)

    @classmethod
    def planar(cls, theta: float, party: str = "A") -> MeasurementSetting:
        """Unit vector at angle ``theta`` from z towards x."""
        return cls((math.sin(theta), 0.0, math.cos(theta)), party)

    @property
    def angle(self) -> float:
        """Planar angle in the x-z plane (meaningless if ``n_y != 0``)."""
        x, _, z = self.vector
        return math.atan2(x, z)


def paper_settings() -> tuple[MeasurementSetting, ...]:
    """``a = z, a' = x, b = -(z + x)/sqrt2, b' = (z - x)/sqrt2``."""
    r = 1.0 / math.sqrt(2.0)
    return (
        MeasurementSetting((0.0, 0.0, 1.0), "A"),
        MeasurementSetting((1.0, 0.0, 0.0), "A"),
        MeasurementSetting((-r, 0.0, -r), "B"),
        MeasurementSetting((-r, 0.0, r), "B"),
    )


def _bloch_matrix(vector) -> np.ndarray:
    return sum(c * p for c, p in zip(vector, PAULIS))


def dichotomous_observable(setting: MeasurementSetting, label: str | None = None) -> OperatorRep:
    """``n . sigma`` on a single qubit labelled by the party."""
    space = HilbertSpace.of((label or setting.party, 2))
    return OperatorRep(space, _bloch_matrix(setting.vector), hermitian=True)


def singlet() -> QuantumState:
    """``(|01> - |10>)/sqrt2``."""
    return QuantumState.normalized(TWO_QUBITS, [0, 1, -1, 0])


def phi_plus() -> QuantumState:
    return QuantumState.normalized(TWO_QUBITS, [1, 0, 0, 1])


def partially_entangled(theta: float) -> QuantumState:
    """``cos(theta)|00> + sin(theta)|11>``."""
    return QuantumState.normalized(TWO_QUBITS, [math.cos(theta), 0, 0, math.sin(theta)])


def product_up_up() -> QuantumState:
    return QuantumState.normalized(TWO_QUBITS, [1, 0, 0, 0])


def _check_two_qubit(state: QuantumState) -> tuple[str, str]:
    dims = [d for _, d in state.space.factors]
    if dims != [2, 2]:
        raise SpaceMismatchError(f"CHSH needs a two-qubit state, got factors {state.space.factors}")
    return state.space.labels


def correlation_tensor(state: QuantumState) -> np.ndarray:
    """Real 3x3 matrix ``T_ij = <sigma_i (x) sigma_j>``."""
    _check_two_qubit(state)
    psi = state.amplitudes
    T = np.empty((3, 3))
    for i, pi in enumerate(PAULIS):
        for j, pj in enumerate(PAULIS):
            T[i, j] = np.vdot(psi, np.kron(pi, pj) @ psi).real
    return T


@dataclass(frozen=True)
class ChshResult:
    """Correlations are ordered ``(ab, ab', a'b, a'b')``."""

    correlations_qm: tuple[float, float, float, float]
    correction: CorrectionValue
    S: CorrectionValue
    settings: tuple[MeasurementSetting, ...]

    @property
    def correlations(self) -> tuple[float, ...]:
        """Deformed correlations ``<f^2> <A B>`` collapsed to floats."""
        return tuple(c * self.correction.value for c in self.correlations_qm)

    @property
    def s_spin_half(self) -> float:
        """Undeformed ``S`` if the observables were ``S_i`` instead of ``sigma_i``."""
        return self.S.base / self.correction.base / 4.0

    def to_row(self, model_id: str = "none", dist_id: str = "none") -> dict:
        from .correction import format_sci

        row = {name: format_sci(s.angle) for name, s in
               zip(("theta_a", "theta_a2", "theta_b", "theta_b2"), self.settings)}
        for name, c in zip(("C_ab", "C_ab2", "C_a2b", "C_a2b2"), self.correlations_qm):
            row[name] = format_sci(c * self.correction.base)
        row["S_base"], row["S_epsilon"] = self.S.as_pair()
        row["model_id"] = model_id
        row["distribution_id"] = dist_id
        return row


def chsh_value(
    state: QuantumState,
    a: MeasurementSetting,
    a2: MeasurementSetting,
    b: MeasurementSetting,
    b2: MeasurementSetting,
    correction: CorrectionValue | None = None,
) -> ChshResult:
    """``S = |C(a,b) - C(a,b') + C(a',b) + C(a',b')|`` with ``C = <f^2><A B>``.

    ``correction=None`` is the undeformed path and yields ``epsilon == 0``.
    """
    left, right = _check_two_qubit(state)
    pairs = ((a, b), (a, b2), (a2, b), (a2, b2))
    corr = tuple(
        expectation(state, dichotomous_observable(x, left).tensor(dichotomous_observable(y, right)))
        for x, y in pairs
    )
    s_qm = abs(corr[0] - corr[1] + corr[2] + corr[3])
    if correction is None:
        correction = CorrectionValue.unity()
        S = CorrectionValue(s_qm, 0.0)
    else:
        S = CorrectionValue(s_qm * correction.base, correction.epsilon)
    return ChshResult(corr, correction, S, (a, a2, b, b2))


def deformed_chsh(state, settings, model: DeformationModel, dist: MomentumDistribution,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ChshResult:
    """CHSH with the correction ``<f^2>`` of a product spin/momentum state."""
    return chsh_value(state, *settings, correction=expectation_f(model, dist, 2, constants))


def chsh_batch(amplitudes, a, a2, b, b2) -> np.ndarray:
    """Undeformed ``S`` for many states and settings at once.

    ``amplitudes`` has shape ``(n, 4)``; each setting array has shape ``(n, 3)``
    of unit vectors.
    """
    psi = np.asarray(amplitudes, dtype=complex)
    ops = np.array([[np.kron(p, q) for q in PAULIS] for p in PAULIS])
    T = np.einsum("nk,ijkl,nl->nij", psi.conj(), ops, psi).real

    def corr(x, y):
        return np.einsum("ni,nij,nj->n", x, T, y)

    return np.abs(corr(a, b) - corr(a, b2) + corr(a2, b) + corr(a2, b2))


@dataclass(frozen=True)
class OptimizedSettings:
    settings: tuple[MeasurementSetting, ...]
    result: ChshResult
    angles: tuple[float, float, float, float]
    converged: bool
    sweeps: int


def _planar_s(Txz: np.ndarray, angles) -> float:
    ta, ta2, tb, tb2 = angles

    def c(x, y):
        return np.array([math.sin(x), math.cos(x)]) @ Txz @ np.array([math.sin(y), math.cos(y)])

    return c(ta, tb) - c(ta, tb2) + c(ta2, tb) + c(ta2, tb2)


def _coordinate_ascent(Txz, angles, sign, tol, max_sweeps):
    """Maximize ``sign * S`` one angle at a time.

    Along any single angle ``sign * S`` is ``A cos t + B sin t + D``, so three
    evaluations fix the sinusoid and its maximizer.
    """
    angles = list(angles)
    value = sign * _planar_s(Txz, angles)
    for sweep in range(1, max_sweeps + 1):
        largest_step = 0.0
        for k in range(4):
            trial = list(angles)
            samples = []
            for t in (0.0, math.pi / 2, math.pi):
                trial[k] = t
                samples.append(sign * _planar_s(Txz, trial))
            f0, f1, f2 = samples
            A = 0.5 * (f0 - f2)
            B = f1 - 0.5 * (f0 + f2)
            if A == 0.0 and B == 0.0:
                continue
            best = math.atan2(B, A)
            step = abs(math.remainder(best - angles[k], 2 * math.pi))
            trial[k] = best
            new_value = sign * _planar_s(Txz, trial)
            if new_value >= value:
                angles, value = trial, new_value
                largest_step = max(largest_step, step)
        if largest_step < tol:
            return angles, value, True, sweep
    return angles, value, False, max_sweeps


def optimize_settings(state: QuantumState, restarts: int = 4, tol: float = 1e-10,
                      max_sweeps: int = 10_000) -> OptimizedSettings:
    """Maximize undeformed ``S`` over four planar (x-z) angles.

    A 24-point-per-angle grid seeds ``restarts`` coordinate-ascent runs from
    the best grid points; the winner is the largest value, ties broken by the
    lexicographically smallest angles in ``[0, 2 pi)``.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    T = correlation_tensor(state)
    Txz = T[np.ix_((0, 2), (0, 2))]

    grid = 2 * math.pi * np.arange(GRID_POINTS) / GRID_POINTS
    n = np.stack([np.sin(grid), np.cos(grid)], axis=1)
    C = n @ Txz @ n.T
    S = C[:, None, :, None] - C[:, None, None, :] + C[None, :, :, None] + C[None, :, None, :]
    flat = np.abs(S).ravel()
    order = np.argsort(-flat, kind="stable")[:restarts]

    candidates = []
    for idx in order:
        i, i2, j, j2 = np.unravel_index(idx, S.shape)
        seed = [grid[i], grid[i2], grid[j], grid[j2]]
        sign = 1.0 if S[i, i2, j, j2] >= 0 else -1.0
        angles, value, converged, sweeps = _coordinate_ascent(Txz, seed, sign, tol, max_sweeps)
        wrapped = tuple(float(t % (2 * math.pi)) for t in angles)
        candidates.append((value, wrapped, converged, sweeps))
    candidates.sort(key=lambda c: (-c[0], c[1]))
    value, angles, converged, sweeps = candidates[0]

    parties = ("A", "A", "B", "B")
    settings = tuple(MeasurementSetting.planar(t, p) for t, p in zip(angles, parties))
    result = chsh_value(state, *settings)
    return OptimizedSettings(settings, result, angles, converged, sweeps)
