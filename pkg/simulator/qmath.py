"""Complex linear-algebra substrate.

Kets over a labelled qubit register, density matrices, tensor products,
partial traces and entropies.  Register convention: the label tuple reads
left to right as most- to least-significant bit of the amplitude index, so
``|011011>`` over ``(A, a, B, b, e1, e2)`` is index ``0b011011``.

Entropies are in bits.  State equality is always fidelity based, never
amplitude-wise, because global phases carry no physical meaning here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Union

import numpy as np

from simulator.errors import (
    DomainError,
    ImpossibleOutcomeError,
    RegisterError,
    ValidationError,
)

# Dense complex128 ndarray; the alias documents intent in signatures.
ComplexMatrix = np.ndarray

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-10
EIGEN_CLIP = 1e-12
PROBABILITY_FLOOR = 1e-12


# ── Validation helpers ──────────────────────────────────────────────────

def as_matrix(data) -> ComplexMatrix:
    """Return *data* as a finite 2-D complex array (copied)."""
    matrix = np.array(data, dtype=complex)
    if matrix.ndim != 2:
        raise ValidationError(f"Expected a 2-D matrix, got shape {matrix.shape}.")
    if not np.all(np.isfinite(matrix)):
        raise ValidationError("Matrix contains NaN or Inf entries.")
    return matrix


def _check_register(register: Iterable[str]) -> tuple[str, ...]:
    labels = tuple(register)
    if not labels:
        raise RegisterError("A register needs at least one qubit label.")
    if len(set(labels)) != len(labels):
        raise RegisterError(f"Duplicate qubit labels in register {labels}.")
    for label in labels:
        if not isinstance(label, str) or not label:
            raise RegisterError(f"Qubit labels must be non-empty strings, got {label!r}.")
    return labels


def _label_index(register: tuple[str, ...], label: str) -> int:
    try:
        return register.index(label)
    except ValueError:
        raise RegisterError(
            f"Unknown qubit label '{label}' (register: {', '.join(register)})."
        ) from None


def is_hermitian(matrix: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(matrix - matrix.conj().T), initial=0.0) <= tol)


# ── Domain types ────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized ket over an ordered qubit register."""

    register: tuple[str, ...]
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        register = _check_register(self.register)
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape[0] != 2 ** len(register):
            raise ValidationError(
                f"{len(register)} qubits need {2 ** len(register)} amplitudes, "
                f"got {amplitudes.shape[0]}."
            )
        if not np.all(np.isfinite(amplitudes)):
            raise ValidationError("State vector contains NaN or Inf amplitudes.")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"State vector is not normalized (norm² = {norm!r}).")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "register", register)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_label(cls, register: Iterable[str], ket: str) -> "StateVector":
        """Computational basis state, e.g. ``from_label(("A", "B"), "01")``."""
        register = tuple(register)
        if len(ket) != len(register) or set(ket) - {"0", "1"}:
            raise ValidationError(
                f"Ket '{ket}' does not match a {len(register)}-qubit register."
            )
        amplitudes = np.zeros(2 ** len(register), dtype=complex)
        amplitudes[int(ket, 2)] = 1.0
        return cls(register, amplitudes)

    @classmethod
    def normalized(cls, register: Iterable[str], amplitudes) -> "StateVector":
        """Build a state from unnormalized amplitudes."""
        amplitudes = np.array(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amplitudes)
        if norm < PROBABILITY_FLOOR:
            raise ValidationError("Cannot normalize the zero vector.")
        return cls(tuple(register), amplitudes / norm)

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    def index_of(self, label: str) -> int:
        return _label_index(self.register, label)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.register, np.outer(self.amplitudes, self.amplitudes.conj()))

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        if self.register != other.register:
            raise RegisterError(
                f"Register mismatch: {self.register} vs {other.register}."
            )
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(register={self.register}, n_amplitudes={self.amplitudes.size})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over a register."""

    register: tuple[str, ...]
    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        register = _check_register(self.register)
        matrix = as_matrix(self.matrix)
        dim = 2 ** len(register)
        if matrix.shape != (dim, dim):
            raise ValidationError(
                f"{len(register)} qubits need a {dim}x{dim} matrix, got {matrix.shape}."
            )
        if not is_hermitian(matrix):
            raise ValidationError("Density matrix is not Hermitian.")
        trace = np.trace(matrix).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValidationError(f"Density matrix trace is {trace!r}, expected 1.")
        smallest = float(np.linalg.eigvalsh(matrix)[0])
        if smallest < -PSD_TOL:
            raise ValidationError(
                f"Density matrix has negative eigenvalue {smallest!r}."
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "register", register)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    def index_of(self, label: str) -> int:
        return _label_index(self.register, label)

    def __repr__(self) -> str:
        return f"DensityMatrix(register={self.register})"


# ── Operations ──────────────────────────────────────────────────────────

def kron(*matrices) -> ComplexMatrix:
    """Kronecker product of one or more matrices (left factor = high bits)."""
    if not matrices:
        raise ValidationError("kron needs at least one factor.")
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in matrices))


def embed(op: ComplexMatrix, position: int, n_qubits: int) -> ComplexMatrix:
    """Single-qubit *op* acting on qubit *position* of an *n_qubits* register."""
    return kron(np.eye(2 ** position), op, np.eye(2 ** (n_qubits - position - 1)))


def partial_trace(rho: DensityMatrix, discard: Iterable[str]) -> DensityMatrix:
    """Trace out the qubits in *discard*; remaining labels keep register order."""
    discard = set(discard)
    for label in discard:
        _label_index(rho.register, label)
    keep = [q for q in rho.register if q not in discard]
    if not keep:
        raise RegisterError("Cannot trace out every qubit of the register.")
    if not discard:
        return DensityMatrix(rho.register, rho.matrix)

    n = rho.n_qubits
    keep_axes = [rho.register.index(q) for q in keep]
    drop_axes = [rho.register.index(q) for q in rho.register if q in discard]
    perm = keep_axes + drop_axes + [n + i for i in keep_axes] + [n + i for i in drop_axes]
    dk, dd = 2 ** len(keep_axes), 2 ** len(drop_axes)
    tensor = rho.matrix.reshape([2] * (2 * n)).transpose(perm).reshape(dk, dd, dk, dd)
    reduced = np.einsum("ijkj->ik", tensor)
    return DensityMatrix(tuple(keep), reduced)


def reduce_state(state: Union[StateVector, DensityMatrix],
                 keep: Iterable[str]) -> DensityMatrix:
    """Reduced state on *keep* (register order), from a ket or a density matrix."""
    keep = set(keep)
    for label in keep:
        _label_index(state.register, label)
    discard = [q for q in state.register if q not in keep]
    rho = state.density() if isinstance(state, StateVector) else state
    return partial_trace(rho, discard)


def condition_on(rho: DensityMatrix, label: str, outcome: int) -> tuple[float, DensityMatrix]:
    """Project *label* onto ``|outcome>``, renormalize and trace the qubit out.

    Returns the outcome probability and the conditional state of the
    remaining qubits.
    """
    if outcome not in (0, 1):
        raise DomainError(f"Outcome must be 0 or 1, got {outcome!r}.")
    if rho.n_qubits < 2:
        raise RegisterError("Conditioning needs at least two qubits.")
    n = rho.n_qubits
    axis = rho.index_of(label)
    index: list = [slice(None)] * (2 * n)
    index[axis] = outcome
    index[n + axis] = outcome
    block = rho.matrix.reshape([2] * (2 * n))[tuple(index)]
    dim = 2 ** (n - 1)
    block = block.reshape(dim, dim)
    probability = float(np.trace(block).real)
    if probability < PROBABILITY_FLOOR:
        raise ImpossibleOutcomeError(
            f"Outcome {outcome} on '{label}' has probability {probability:.3g}."
        )
    remaining = tuple(q for q in rho.register if q != label)
    return probability, DensityMatrix(remaining, block / probability)


def von_neumann_entropy(rho: Union[DensityMatrix, ComplexMatrix]) -> float:
    """S(rho) = -sum(l * log2 l), eigenvalues below 1e-12 count as zero."""
    if isinstance(rho, DensityMatrix):
        matrix = rho.matrix
    else:
        matrix = as_matrix(rho)
        if matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"Entropy needs a square matrix, got {matrix.shape}.")
        if not is_hermitian(matrix):
            raise ValidationError("Entropy is only defined for Hermitian matrices.")
    eigenvalues = np.linalg.eigvalsh(matrix)
    eigenvalues = eigenvalues[eigenvalues > EIGEN_CLIP]
    entropy = float(-np.sum(eigenvalues * np.log2(eigenvalues)))
    return max(entropy, 0.0)


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2 (1-p)."""
    if p < -1e-12 or p > 1.0 + 1e-12:
        raise DomainError(f"Probability must lie in [0, 1], got {p!r}.")
    p = min(max(float(p), 0.0), 1.0)
    return sum(-x * math.log2(x) for x in (p, 1.0 - p) if x > 0.0)


def state_fidelity(psi: StateVector, phi: StateVector) -> float:
    """|<psi|phi>|² for two kets on the same register."""
    return abs(psi.inner(phi)) ** 2


def equal_up_to_global_phase(psi: StateVector, phi: StateVector,
                             tol: float = 1e-10) -> bool:
    return state_fidelity(psi, phi) >= 1.0 - tol


# ── Random ensembles (property checks) ──────────────────────────────────

def random_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_density_matrix(register: Iterable[str], rng: np.random.Generator,
                          rank: int | None = None) -> DensityMatrix:
    """Ginibre-ensemble mixed state (full rank unless *rank* is given)."""
    register = tuple(register)
    dim = 2 ** len(register)
    cols = dim if rank is None else rank
    g = rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(register, rho / np.trace(rho).real)
