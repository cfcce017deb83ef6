"""Simulated Pauli state tomography with readout noise and mitigation.

Pipeline per repetition::

    counts  ->  (mitigation)  ->  Pauli expectations  ->  linear inversion
            ->  projection onto density matrices  ->  irreality estimates

Every setting of every repetition draws from its own generator, seeded
from ``SeedSequence(seed, spawn_key=(stream, repetition, setting))``.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from simulator.circuit import MeasurementSetting, born_probabilities, draw_outcomes, tally
from simulator.errors import DomainError, ReconstructionError, RegisterError, ValidationError
from simulator.measures import irreality
from simulator.qmath import (
    EIGEN_CLIP,
    ComplexMatrix,
    DensityMatrix,
    StateVector,
    as_matrix,
    condition_on,
    is_hermitian,
    kron,
    reduce_state,
)

logger = logging.getLogger(__name__)

MAX_QUBITS = 6
PROJECTION_HERMITIAN_TOL = 1e-8
_STOCHASTIC_TOL = 1e-12
_SINGULAR_TOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

Counts = dict[str, dict[str, float]]


# ── Readout noise ────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class ReadoutNoiseModel:
    """Independent per-qubit readout confusion, ``C[i][j] = p(record i | true j)``."""

    confusions: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        matrices = []
        for k, c in enumerate(self.confusions):
            c = np.array(c, dtype=float)
            if c.shape != (2, 2):
                raise ValidationError(f"Confusion matrix {k} must be 2x2, got {c.shape}.")
            if np.any(c < 0.0) or np.any(c > 1.0):
                raise ValidationError(f"Confusion matrix {k} has entries outside [0, 1].")
            if np.max(np.abs(c.sum(axis=0) - 1.0)) > _STOCHASTIC_TOL:
                raise ValidationError(f"Columns of confusion matrix {k} must sum to 1.")
            c.setflags(write=False)
            matrices.append(c)
        if not matrices:
            raise ValidationError("Noise model needs at least one qubit.")
        object.__setattr__(self, "confusions", tuple(matrices))

    @classmethod
    def uniform(cls, n_qubits: int, p: float) -> "ReadoutNoiseModel":
        """Symmetric bit flips with probability *p* on every qubit."""
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"Flip probability must lie in [0, 1], got {p!r}.")
        c = np.array([[1.0 - p, p], [p, 1.0 - p]])
        return cls(tuple(c for _ in range(n_qubits)))

    @classmethod
    def identity(cls, n_qubits: int) -> "ReadoutNoiseModel":
        return cls.uniform(n_qubits, 0.0)

    @property
    def n_qubits(self) -> int:
        return len(self.confusions)

    def matrix(self) -> np.ndarray:
        return np.real(kron(*self.confusions))

    def apply(self, frequencies: np.ndarray) -> np.ndarray:
        return self.matrix() @ np.asarray(frequencies, dtype=float)

    def flip(self, outcomes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Corrupt recorded outcome indices shot by shot."""
        outcomes = np.array(outcomes, dtype=np.int64)
        n = self.n_qubits
        for k, c in enumerate(self.confusions):
            shift = n - 1 - k
            bits = (outcomes >> shift) & 1
            p_flip = np.where(bits == 0, c[1, 0], c[0, 1])
            flips = (rng.random(outcomes.shape) < p_flip).astype(np.int64)
            outcomes ^= flips << shift
        return outcomes


# ── Settings and counts ──────────────────────────────────────────────────

def pauli_settings(qubits: Union[int, Sequence[str]]) -> list[MeasurementSetting]:
    """All 3^n basis combinations, X < Y < Z lexicographically."""
    labels = tuple(f"q{i}" for i in range(qubits)) if isinstance(qubits, int) else tuple(qubits)
    if not 1 <= len(labels) <= MAX_QUBITS:
        raise DomainError(f"Tomography supports 1 to {MAX_QUBITS} qubits, got {len(labels)}.")
    return [MeasurementSetting(labels, "".join(b)) for b in itertools.product("XYZ", repeat=len(labels))]


def _generator(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=keys))


def simulate_counts(state: Union[StateVector, DensityMatrix], qubits: Sequence[str], shots: int,
                    noise: Optional[ReadoutNoiseModel] = None, seed: int = 0, *,
                    repetition: int = 0, stream: int = 0) -> dict[str, dict[str, int]]:
    """Shot counts for every Pauli setting on *qubits*, keyed by setting string."""
    qubits = tuple(qubits)
    if shots < 1:
        raise DomainError(f"shots must be at least 1, got {shots}.")
    if noise is not None and noise.n_qubits != len(qubits):
        raise ValidationError(
            f"Noise model covers {noise.n_qubits} qubits, measuring {len(qubits)}."
        )
    reduced = reduce_state(state, qubits)
    counts: dict[str, dict[str, int]] = {}
    for index, setting in enumerate(pauli_settings(qubits)):
        rng = _generator(seed, stream, repetition, index)
        outcomes = draw_outcomes(born_probabilities(reduced, setting), shots, rng)
        if noise is not None:
            outcomes = noise.flip(outcomes, rng)
        counts[setting.bases] = tally(outcomes, len(qubits))
        logger.debug("Setting %s: %s", setting.bases, counts[setting.bases])
    return counts


def _count_vector(outcomes: Mapping[str, float], n_bits: int) -> np.ndarray:
    vector = np.zeros(2 ** n_bits)
    for bits, value in outcomes.items():
        if len(bits) != n_bits or set(bits) - {"0", "1"}:
            raise ValidationError(f"Outcome '{bits}' is not a {n_bits}-bit string.")
        vector[int(bits, 2)] += value
    return vector


def mitigate_frequencies(frequencies: np.ndarray, noise: ReadoutNoiseModel) -> np.ndarray:
    """Undo readout confusion on a frequency (or count) vector."""
    matrix = noise.matrix()
    if abs(np.linalg.det(matrix)) < _SINGULAR_TOL:
        raise ReconstructionError("Confusion matrix is singular; counts cannot be mitigated.")
    return np.linalg.solve(matrix, np.asarray(frequencies, dtype=float))


def mitigate_counts(counts: Mapping[str, Mapping[str, float]],
                    noise: ReadoutNoiseModel) -> Counts:
    """Real-valued counts with the tensor-product confusion inverted."""
    mitigated: Counts = {}
    for setting, outcomes in counts.items():
        if len(setting) != noise.n_qubits:
            raise ValidationError(
                f"Setting '{setting}' does not match a {noise.n_qubits}-qubit noise model."
            )
        corrected = mitigate_frequencies(_count_vector(outcomes, len(setting)), noise)
        mitigated[setting] = {
            format(i, f"0{len(setting)}b"): float(v) for i, v in enumerate(corrected) if v != 0.0
        }
    return mitigated


def counts_to_json(counts: Mapping[str, Mapping[str, float]]) -> list[dict]:
    return [{"setting": setting, "outcomes": dict(outcomes)} for setting, outcomes in counts.items()]


def counts_from_json(records: Iterable[Mapping]) -> Counts:
    counts: Counts = {}
    for record in records:
        try:
            setting, outcomes = record["setting"], record["outcomes"]
        except (KeyError, TypeError):
            raise ValidationError(f"Counts record needs 'setting' and 'outcomes': {record!r}.") from None
        if not isinstance(setting, str) or set(setting) - set("XYZ"):
            raise ValidationError(f"Invalid setting {setting!r}.")
        counts[setting] = {str(k): v for k, v in dict(outcomes).items()}
    return counts


# ── Reconstruction ───────────────────────────────────────────────────────

def pauli_expectations(counts: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    """Expectation of every Pauli string from the first setting covering it."""
    if not counts:
        raise ReconstructionError("No counts to reconstruct from.")
    n = len(next(iter(counts)))
    frequencies = {}
    for setting, outcomes in counts.items():
        vector = _count_vector(outcomes, n)
        total = vector.sum()
        if total <= 0.0:
            raise ReconstructionError(f"Setting '{setting}' has no recorded shots.")
        frequencies[setting] = vector / total

    indices = np.arange(2 ** n)
    expectations: dict[str, float] = {}
    for factors in itertools.product("IXYZ", repeat=n):
        pauli = "".join(factors)
        if set(pauli) == {"I"}:
            expectations[pauli] = 1.0
            continue
        setting = pauli.replace("I", "X")
        if setting not in frequencies:
            raise ReconstructionError(f"No counts for setting '{setting}' (needed by {pauli}).")
        mask = int("".join("0" if p == "I" else "1" for p in pauli), 2)
        parity = np.array([bin(i & mask).count("1") % 2 for i in indices])
        expectations[pauli] = float(np.dot(1 - 2 * parity, frequencies[setting]))
    return expectations


@lru_cache(maxsize=None)
def _pauli_matrix(pauli: str) -> np.ndarray:
    m = kron(*(PAULI[p] for p in pauli))
    m.setflags(write=False)
    return m


def linear_inversion(expectations: Mapping[str, float]) -> ComplexMatrix:
    """rho = (1/2^n) sum_P <P> P over all 4^n Pauli strings."""
    if not expectations:
        raise ReconstructionError("No expectations to invert.")
    n = len(next(iter(expectations)))
    rho = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for factors in itertools.product("IXYZ", repeat=n):
        pauli = "".join(factors)
        if pauli not in expectations:
            raise ReconstructionError(f"Missing Pauli term '{pauli}'.")
        rho += expectations[pauli] * _pauli_matrix(pauli)
    return rho / 2 ** n


def project_spectrum(eigenvalues: Sequence[float]) -> np.ndarray:
    """Nearest probability vector to a unit-sum spectrum.

    Negative entries are zeroed from the bottom up and their accumulated
    weight is spread evenly over the entries that remain.  The result keeps
    the input order.
    """
    values = np.asarray(eigenvalues, dtype=float)
    order = np.argsort(values)[::-1]
    lam = values[order].copy()
    deficit = 0.0
    i = len(lam) - 1
    while i >= 0 and lam[i] + deficit / (i + 1) < 0.0:
        deficit += lam[i]
        lam[i] = 0.0
        i -= 1
    lam[: i + 1] += deficit / (i + 1)
    result = np.empty_like(lam)
    result[order] = lam
    return result


def project_to_physical(h: ComplexMatrix, register: Optional[Sequence[str]] = None) -> DensityMatrix:
    """Closest density matrix in the 2-norm, by eigenvalue water-filling."""
    matrix = as_matrix(h)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"Projection needs a square matrix, got {matrix.shape}.")
    if not is_hermitian(matrix, PROJECTION_HERMITIAN_TOL):
        raise ValidationError("Projection needs a Hermitian matrix.")
    dim = matrix.shape[0]
    n = dim.bit_length() - 1
    if 2 ** n != dim:
        raise ValidationError(f"Dimension {dim} is not a power of two.")
    register = tuple(f"q{i}" for i in range(n)) if register is None else tuple(register)

    eigenvalues, vectors = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    if np.all(np.abs(eigenvalues) < EIGEN_CLIP):
        raise ReconstructionError("Cannot project an all-zero spectrum.")
    trace = eigenvalues.sum()
    if trace <= EIGEN_CLIP:
        raise ReconstructionError(f"Cannot project a matrix with trace {trace:.3g}.")

    lam = project_spectrum(eigenvalues / trace)
    rho = (vectors * lam) @ vectors.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(register, rho / np.trace(rho).real)


# ── Full pipeline ────────────────────────────────────────────────────────

@dataclass
class ReconstructionReport:
    """Outcome of ``reconstruct``: counts, states and irreality estimates per repetition."""

    qubits: tuple[str, ...]
    settings_count: int
    shots: int
    repetitions: int
    seed: int
    mitigated: bool
    raw_counts: list[dict] = field(default_factory=list)
    mitigated_counts: list[dict] = field(default_factory=list)
    states: list[DensityMatrix] = field(default_factory=list)
    estimates: dict[str, list[float]] = field(default_factory=dict)
    condition: Optional[tuple[str, int]] = None
    runtime_ms: float = 0.0

    @property
    def state(self) -> DensityMatrix:
        return self.states[0]

    @property
    def mean(self) -> dict[str, float]:
        return {t: float(np.mean(v)) for t, v in self.estimates.items()}

    @property
    def std(self) -> dict[str, float]:
        return {t: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
                for t, v in self.estimates.items()}

    def to_dict(self) -> dict:
        return {
            "qubits": list(self.qubits),
            "settings_count": self.settings_count,
            "shots": self.shots,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "mitigated": self.mitigated,
            "condition": list(self.condition) if self.condition else None,
            "estimates": {t: list(v) for t, v in self.estimates.items()},
            "mean": self.mean,
            "std": self.std,
            "raw_counts": [counts_to_json(c) for c in self.raw_counts],
            "mitigated_counts": [counts_to_json(c) for c in self.mitigated_counts],
            "summary": {
                "runtime_ms": self.runtime_ms,
            },
        }


def reconstruct(state: Union[StateVector, DensityMatrix], qubits: Sequence[str], shots: int,
                noise: Optional[ReadoutNoiseModel] = None, mitigate: bool = False,
                repetitions: int = 1, seed: int = 0, *,
                targets: Optional[Sequence[str]] = None,
                condition: Optional[tuple[str, int]] = None,
                stream: int = 0) -> ReconstructionReport:
    """Simulated tomography of *qubits* followed by irreality estimation.

    *condition* = ``(label, outcome)`` projects the reconstructed state on one
    outcome of a measured qubit before the measures are taken.
    """
    qubits = tuple(qubits)
    if repetitions < 1:
        raise DomainError(f"repetitions must be at least 1, got {repetitions}.")
    if condition is not None and condition[0] not in qubits:
        raise RegisterError(f"Condition qubit '{condition[0]}' is not among {qubits}.")
    if targets is None:
        targets = tuple(q for q in qubits if condition is None or q != condition[0])
    targets = tuple(targets)
    for target in targets:
        if target not in qubits:
            raise RegisterError(f"Target '{target}' is not among the measured qubits {qubits}.")
        if condition is not None and target == condition[0]:
            raise RegisterError(f"Target '{target}' is also the conditioning qubit.")
    if mitigate and noise is None:
        noise_for_mitigation = ReadoutNoiseModel.identity(len(qubits))
    else:
        noise_for_mitigation = noise

    t_start = time.perf_counter()
    report = ReconstructionReport(
        qubits=qubits, settings_count=3 ** len(qubits), shots=shots,
        repetitions=repetitions, seed=seed, mitigated=mitigate, condition=condition,
        estimates={t: [] for t in targets},
    )
    reduced = reduce_state(state, qubits)
    for repetition in range(repetitions):
        raw = simulate_counts(reduced, qubits, shots, noise, seed,
                              repetition=repetition, stream=stream)
        report.raw_counts.append(raw)
        used: Mapping = raw
        if mitigate:
            used = mitigate_counts(raw, noise_for_mitigation)
            report.mitigated_counts.append(used)
        rho = project_to_physical(linear_inversion(pauli_expectations(used)), register=qubits)
        report.states.append(rho)
        measured = rho if condition is None else condition_on(rho, *condition)[1]
        for target in targets:
            report.estimates[target].append(irreality(measured, target))

    report.runtime_ms = round((time.perf_counter() - t_start) * 1000, 2)
    logger.info("Reconstructed %s: %d repetitions x %d settings x %d shots in %.0f ms; mean %s",
                ",".join(qubits), repetitions, report.settings_count, shots,
                report.runtime_ms, report.mean)
    return report
