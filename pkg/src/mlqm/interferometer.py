"""Single-neutron spin/path contextuality experiment.

The beamline is a chain of 4x4 unitaries on spin (x) path, with path basis
``{|r>, |b>}``. The common path ``|g>`` is taken as the undeflected track
``|r>``, so the Wollaston prism pair is a spin-controlled path flip:
``|up, g> -> |up, r>`` and ``|down, g> -> |down, b>``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .correction import CorrectionValue
from .deformation import DeformationModel, expectation_f
from .errors import DomainError
from .hilbert import PAULI_X, PAULI_Y, HilbertSpace, MomentumDistribution, OperatorRep, QuantumState, expectation

SPIN_PATH = HilbertSpace.of(("spin", 2), ("path", 2))
# shots per independently seeded chunk; fixed so results ignore worker count
CHUNK_SHOTS = 1 << 18

_UP = np.diag([1.0, 0.0]).astype(complex)
_DOWN = np.diag([0.0, 1.0]).astype(complex)
_I2 = np.eye(2, dtype=complex)


class Element(str, enum.Enum):
    POLARIZER = "polarizer"
    PI_HALF_FLIPPER = "pi_half_flipper"
    MWP_ENTANGLER = "mwp_entangler"
    SPIN_PHASE_COIL = "spin_phase_coil"
    PHASE_CRYSTAL = "phase_crystal"
    MWP_DISENTANGLER = "mwp_disentangler"
    ANALYZER = "analyzer"


BEAMLINE = (
    Element.POLARIZER,
    Element.PI_HALF_FLIPPER,
    Element.MWP_ENTANGLER,
    Element.SPIN_PHASE_COIL,
    Element.PHASE_CRYSTAL,
    Element.MWP_DISENTANGLER,
    Element.PI_HALF_FLIPPER,
    Element.ANALYZER,
)


@dataclass(frozen=True)
class NoiseModel:
    """Dephasing/depolarization as one contrast factor on every ``E``."""

    visibility: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.visibility <= 1.0:
            raise DomainError(f"visibility must lie in (0, 1], got {self.visibility}")


# 2.20 / (2 sqrt 2): reproduces both the 2.20 maximum and the 1.56 classical threshold
CALIBRATED_VISIBILITY = 0.778


@dataclass(frozen=True)
class BeamlineConfig:
    alpha: float = 0.0
    chi: float = 0.0
    entanglement_length_m: float = 0.0
    beam: tuple[float, float] = (0.939565, 0.01)
    noise: NoiseModel = field(default_factory=NoiseModel)
    elements: tuple[Element, ...] = BEAMLINE

    def __post_init__(self) -> None:
        if tuple(self.elements) != BEAMLINE:
            raise DomainError("beamline element order is fixed")
        for name in ("alpha", "chi"):
            phase = getattr(self, name)
            if not -math.pi <= phase <= math.pi:
                raise DomainError(f"{name}={phase} outside [-pi, pi]")


def element_unitary(element: Element, alpha: float = 0.0, chi: float = 0.0) -> np.ndarray:
    """4x4 matrix of a beamline element on spin (x) path."""
    if element is Element.PI_HALF_FLIPPER:
        # rotation about y by pi/2: z-polarization -> x-polarization
        ry = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2.0)
        return np.kron(ry, _I2)
    if element is Element.MWP_ENTANGLER:
        return np.kron(_UP, _I2) + np.kron(_DOWN, PAULI_X)
    if element is Element.MWP_DISENTANGLER:
        return element_unitary(Element.MWP_ENTANGLER).conj().T
    if element is Element.SPIN_PHASE_COIL:
        return np.kron(np.diag([1.0, np.exp(1j * alpha)]), _I2)
    if element is Element.PHASE_CRYSTAL:
        return np.kron(_I2, np.diag([1.0, np.exp(1j * chi)]))
    if element in (Element.POLARIZER, Element.ANALYZER):
        return np.eye(4, dtype=complex)
    raise ValueError(f"unknown element {element!r}")


def ground_path_state() -> np.ndarray:
    return np.array([1.0, 0.0], dtype=complex)


class StagedStates(NamedTuple):
    psi_in: QuantumState
    psi_1: QuantumState
    psi_2: QuantumState
    psi_3: QuantumState


def propagate(config: BeamlineConfig) -> StagedStates:
    """Push the polarized beam through the beamline and keep the four stages."""
    psi = np.kron(np.array([1.0, 0.0], dtype=complex), ground_path_state())
    stages = {}
    for element in config.elements[:-2]:
        psi = element_unitary(element, config.alpha, config.chi) @ psi
        stages[element] = psi
    return StagedStates(
        QuantumState(SPIN_PATH, stages[Element.PI_HALF_FLIPPER]),
        QuantumState(SPIN_PATH, stages[Element.MWP_ENTANGLER]),
        QuantumState(SPIN_PATH, stages[Element.PHASE_CRYSTAL]),
        QuantumState(SPIN_PATH, stages[Element.MWP_DISENTANGLER]),
    )


def spin_phase_observable(alpha: float) -> np.ndarray:
    return math.cos(alpha) * PAULI_X + math.sin(alpha) * PAULI_Y


def path_phase_observable(chi: float) -> np.ndarray:
    return math.cos(chi) * PAULI_X + math.sin(chi) * PAULI_Y


def joint_observable(alpha: float, chi: float) -> OperatorRep:
    return OperatorRep(SPIN_PATH, np.kron(spin_phase_observable(alpha), path_phase_observable(chi)),
                       hermitian=True)


def exact_expectation(alpha: float, chi: float, noise: NoiseModel = NoiseModel(),
                      stage: str = "entangled") -> float:
    """``E(alpha, chi) = v <psi_1| sigma_alpha (x) sigma_chi |psi_1> = v cos(alpha + chi)``.

    ``stage="input"`` evaluates on the unentangled input state instead, where
    the correlation vanishes identically.
    """
    states = propagate(BeamlineConfig(noise=noise))
    state = {"entangled": states.psi_1, "input": states.psi_in}[stage]
    return noise.visibility * expectation(state, joint_observable(alpha, chi))


class WitnessSettings(NamedTuple):
    alpha1: float
    alpha2: float
    chi1: float
    chi2: float

    def pairs(self) -> tuple[tuple[float, float], ...]:
        return ((self.alpha1, self.chi1), (self.alpha1, self.chi2),
                (self.alpha2, self.chi1), (self.alpha2, self.chi2))


PAPER_WITNESS_SETTINGS = WitnessSettings(0.0, math.pi / 2, -math.pi / 4, math.pi / 4)


@dataclass(frozen=True)
class WitnessResult:
    """``E`` values ordered as :meth:`WitnessSettings.pairs`."""

    E: tuple[float, float, float, float]
    S: CorrectionValue
    stderr: float | None = None
    settings: WitnessSettings = PAPER_WITNESS_SETTINGS
    visibility: float = 1.0

    @property
    def classical_threshold(self) -> float:
        """Noisy local bound ``2 v``."""
        return 2.0 * self.visibility


def _combine(E) -> float:
    return abs(E[0] + E[1] + E[2] - E[3])


def witness(settings: WitnessSettings = PAPER_WITNESS_SETTINGS, noise: NoiseModel = NoiseModel(),
            correction: CorrectionValue | None = None) -> WitnessResult:
    """``S' = |E11 + E12 + E21 - E22|`` scaled once by ``<f>``."""
    settings = WitnessSettings(*settings)
    E = tuple(exact_expectation(a, c, noise) for a, c in settings.pairs())
    correction = correction or CorrectionValue.unity()
    S = CorrectionValue(_combine(E) * correction.base, correction.epsilon)
    return WitnessResult(E, S, None, settings, noise.visibility)


def deformed_witness(model: DeformationModel, dist: MomentumDistribution,
                     settings: WitnessSettings = PAPER_WITNESS_SETTINGS,
                     noise: NoiseModel = NoiseModel(),
                     constants: PhysicalConstants = DEFAULT_CONSTANTS) -> WitnessResult:
    return witness(settings, noise, expectation_f(model, dist, 1, constants))


@dataclass(frozen=True, eq=False)
class CountTable:
    """Detector counts per phase pair, columns ``(N_pp, N_pm, N_mp, N_mm)``.

    ``N_pm`` is ``N(alpha, chi + pi)`` and ``N_mp`` is ``N(alpha + pi, chi)``.
    """

    pairs: tuple[tuple[float, float], ...]
    counts: np.ndarray
    shots_per_setting: int
    rng_seed: int

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64)
        counts.setflags(write=False)
        if counts.shape != (len(self.pairs), 4):
            raise ValueError(f"counts shape {counts.shape} does not match {len(self.pairs)} settings")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def total_counts(self) -> int:
        return int(self.counts.sum())

    def row(self, alpha: float, chi: float) -> np.ndarray:
        for k, (a, c) in enumerate(self.pairs):
            if a == alpha and c == chi:
                return self.counts[k]
        raise KeyError(f"no counts recorded for (alpha={alpha}, chi={chi})")


def _outcome_probabilities(E: float) -> np.ndarray:
    # joint +-1 outcomes with correlation E and unbiased marginals
    p_same = (1.0 + E) / 4.0
    p_diff = (1.0 - E) / 4.0
    return np.clip(np.array([p_same, p_diff, p_diff, p_same]), 0.0, 1.0)


def _chunk_counts(seed: int, setting_index: int, chunk_index: int, shots: int, probs) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(setting_index, chunk_index))
    return np.random.Generator(np.random.PCG64(ss)).multinomial(shots, probs)


def simulate_counts(settings: WitnessSettings = PAPER_WITNESS_SETTINGS,
                    noise: NoiseModel = NoiseModel(), shots_per_setting: int = 10_000,
                    seed: int = 0, workers: int = 1) -> CountTable:
    """Draw detector counts for each of the four phase pairs.

    Shots are split into fixed-size chunks, each with its own substream keyed
    by ``(seed, setting, chunk)``; the merged table does not depend on
    ``workers``.
    """
    if int(shots_per_setting) != shots_per_setting or shots_per_setting < 1:
        raise DomainError(f"shots_per_setting must be a positive integer, got {shots_per_setting}")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    shots_per_setting = int(shots_per_setting)
    pairs = WitnessSettings(*settings).pairs()

    jobs = []
    for s, (alpha, chi) in enumerate(pairs):
        probs = _outcome_probabilities(exact_expectation(alpha, chi, noise))
        n_chunks = -(-shots_per_setting // CHUNK_SHOTS)
        for c in range(n_chunks):
            shots = min(CHUNK_SHOTS, shots_per_setting - c * CHUNK_SHOTS)
            jobs.append((s, c, shots, probs))

    def run(job):
        s, c, shots, probs = job
        return s, _chunk_counts(seed, s, c, shots, probs)

    if workers == 1:
        results = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))

    counts = np.zeros((len(pairs), 4), dtype=np.int64)
    for s, chunk in results:
        counts[s] += chunk
    return CountTable(pairs, counts, shots_per_setting, seed)


def estimate_from_counts(n_pp, n_pm, n_mp, n_mm) -> tuple[float, float]:
    total = n_pp + n_pm + n_mp + n_mm
    if total <= 0:
        raise DomainError("no counts recorded for this setting")
    E_hat = (n_pp - n_pm - n_mp + n_mm) / total
    # each shot contributes a +-1 product outcome
    stderr = math.sqrt(max(0.0, 1.0 - E_hat * E_hat) / total)
    return E_hat, stderr


def estimate_E(table: CountTable, alpha: float, chi: float) -> tuple[float, float]:
    """Count-ratio estimator of ``E(alpha, chi)`` and its binomial standard error."""
    return estimate_from_counts(*(int(n) for n in table.row(alpha, chi)))


def witness_from_counts(table: CountTable, correction: CorrectionValue | None = None,
                        visibility: float = 1.0) -> WitnessResult:
    estimates = [estimate_from_counts(*(int(n) for n in row)) for row in table.counts]
    E = tuple(e for e, _ in estimates)
    stderr = math.sqrt(sum(s * s for _, s in estimates))
    correction = correction or CorrectionValue.unity()
    S = CorrectionValue(_combine(E) * correction.base, correction.epsilon)
    a1, c1 = table.pairs[0]
    a2, c2 = table.pairs[3]
    return WitnessResult(E, S, stderr, WitnessSettings(a1, a2, c1, c2), visibility)
