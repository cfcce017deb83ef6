"""Gate library, circuit evolution with stage snapshots, post-selection and
shot sampling.

The optical elements of the interferometer map onto gates as follows:

  - BBO' source : RY(theta) on A, CNOT A->B, X on B
  - PBS         : CZ then CY, polarization as control, path as target
  - HWP         : CNOT with the path as control and the polarization as target
  - PAI         : CNOT path -> atom (atom 1 conjugated with X on the path)
  - mirrors     : MIRROR = Y.Z
  - BS          : BS = S.H.S
  - QWP         : QWP = S.H

Composite matrices are written as matrix products, so the right-most factor
acts first.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Hashable, Sequence, Union

import numpy as np

from simulator.errors import (
    DomainError,
    GateError,
    ImpossibleOutcomeError,
    RegisterError,
    ValidationError,
)
from simulator.qmath import (
    PROBABILITY_FLOOR,
    ComplexMatrix,
    DensityMatrix,
    StateVector,
    kron,
    reduce_state,
)

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-12

_SQRT2_INV = 1 / math.sqrt(2)

_BASE_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
}

# Controlled gates: control is the first target label, target the second.
_CONTROLLED = {"CNOT": "X", "CZ": "Z", "CY": "Y"}

_COMPOSITES = {
    "MIRROR": ("Y", "Z"),
    "BS": ("S", "H", "S"),
    "QWP": ("S", "H"),
}

GATE_NAMES = tuple(_BASE_1Q) + ("RY",) + tuple(_CONTROLLED) + tuple(_COMPOSITES)


# ── Gates ────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Gate:
    """Named one- or two-qubit unitary."""

    name: str
    unitary: ComplexMatrix

    def __post_init__(self) -> None:
        u = np.array(self.unitary, dtype=complex)
        if u.shape not in ((2, 2), (4, 4)):
            raise GateError(f"Gate '{self.name}' must be 2x2 or 4x4, got {u.shape}.")
        if not np.all(np.isfinite(u)):
            raise GateError(f"Gate '{self.name}' has non-finite entries.")
        deviation = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
        if deviation > UNITARY_TOL:
            raise GateError(f"Gate '{self.name}' is not unitary (|U+U - I| = {deviation:.2e}).")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)

    @property
    def arity(self) -> int:
        return 1 if self.unitary.shape[0] == 2 else 2

    def __repr__(self) -> str:
        return f"Gate({self.name!r}, arity={self.arity})"


def controlled(u: ComplexMatrix) -> ComplexMatrix:
    """|0><0| (x) I + |1><1| (x) u."""
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    return kron(p0, np.eye(2)) + kron(p1, u)


def standard_gate(name: str, *params: float) -> Gate:
    """Return a library gate by name; ``RY`` takes the rotation angle."""
    key = name.upper()
    if key == "RY":
        if len(params) != 1:
            raise GateError("RY takes exactly one angle.")
        theta = float(params[0])
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return Gate(f"RY({theta:.12g})", np.array([[c, -s], [s, c]], dtype=complex))
    if params:
        raise GateError(f"Gate '{name}' takes no parameters.")
    if key in _BASE_1Q:
        return Gate(key, _BASE_1Q[key])
    if key in _CONTROLLED:
        return Gate(key, controlled(_BASE_1Q[_CONTROLLED[key]]))
    if key in _COMPOSITES:
        factors = [_BASE_1Q[f] for f in _COMPOSITES[key]]
        return Gate(key, reduce(np.matmul, factors))
    raise GateError(f"Unknown gate '{name}'. Known gates: {', '.join(GATE_NAMES)}.")


def apply_gate(state: StateVector, gate: Gate, targets: Union[str, Sequence[str]]) -> StateVector:
    """Apply *gate* to the qubits named in *targets* (control first)."""
    targets = (targets,) if isinstance(targets, str) else tuple(targets)
    if len(targets) != gate.arity:
        raise GateError(
            f"Gate '{gate.name}' acts on {gate.arity} qubit(s), got targets {targets}."
        )
    if len(set(targets)) != len(targets):
        raise RegisterError(f"Gate targets must be distinct, got {targets}.")
    axes = [state.index_of(t) for t in targets]
    n, k = state.n_qubits, gate.arity

    tensor = state.amplitudes.reshape([2] * n)
    u = gate.unitary.reshape([2] * (2 * k))
    out = np.tensordot(u, tensor, axes=(list(range(k, 2 * k)), axes))
    # tensordot leaves the gate's output axes in front
    out = np.moveaxis(out, list(range(k)), axes)
    return StateVector(state.register, out.reshape(-1))


# ── Circuits ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Step:
    gate: Gate
    targets: tuple[str, ...]


@dataclass
class Circuit:
    """Ordered gate applications with named stage markers.

    A marker registered with ``mark`` points at the last step appended so
    far; its snapshot is the state after that step.
    """

    register: tuple[str, ...]
    steps: list[Step] = field(default_factory=list)
    markers: dict[Hashable, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.register = tuple(self.register)
        if len(set(self.register)) != len(self.register):
            raise RegisterError(f"Duplicate qubit labels in register {self.register}.")

    def append(self, gate: Gate, *targets: str) -> "Circuit":
        for label in targets:
            if label not in self.register:
                raise RegisterError(
                    f"Unknown qubit label '{label}' (register: {', '.join(self.register)})."
                )
        if len(targets) != gate.arity:
            raise GateError(
                f"Gate '{gate.name}' acts on {gate.arity} qubit(s), got targets {targets}."
            )
        if len(set(targets)) != len(targets):
            raise RegisterError(f"Gate targets must be distinct, got {targets}.")
        self.steps.append(Step(gate, tuple(targets)))
        return self

    def mark(self, stage: Hashable) -> "Circuit":
        if not self.steps:
            raise ValidationError(f"Cannot mark '{stage}' before any step.")
        index = len(self.steps) - 1
        if self.markers and index <= max(self.markers.values()):
            raise ValidationError(
                f"Marker '{stage}' at step {index} does not follow the previous marker."
            )
        if stage in self.markers:
            raise ValidationError(f"Marker '{stage}' already set.")
        self.markers[stage] = index
        return self

    def __len__(self) -> int:
        return len(self.steps)


def run_with_snapshots(circuit: Circuit, initial: StateVector
                       ) -> tuple[StateVector, dict[Hashable, StateVector]]:
    """Evolve *initial* through *circuit*; snapshot the state at every marker."""
    if initial.register != circuit.register:
        raise RegisterError(
            f"Initial register {initial.register} does not match circuit register "
            f"{circuit.register}."
        )
    at_step = {index: stage for stage, index in circuit.markers.items()}
    state = initial
    snapshots: dict[Hashable, StateVector] = {}
    for index, step in enumerate(circuit.steps):
        state = apply_gate(state, step.gate, step.targets)
        if index in at_step:
            snapshots[at_step[index]] = state
    logger.debug("Ran %d steps, %d snapshots", len(circuit.steps), len(snapshots))
    return state, snapshots


def post_select(state: StateVector, qubit: str, outcome: int) -> tuple[float, StateVector]:
    """Condition *state* on ``qubit = outcome``; the qubit stays in the register."""
    if outcome not in (0, 1):
        raise DomainError(f"Outcome must be 0 or 1, got {outcome!r}.")
    axis = state.index_of(qubit)
    tensor = np.array(state.amplitudes).reshape([2] * state.n_qubits)
    index: list = [slice(None)] * state.n_qubits
    index[axis] = 1 - outcome
    tensor[tuple(index)] = 0.0
    probability = float(np.vdot(tensor, tensor).real)
    if probability < PROBABILITY_FLOOR:
        raise ImpossibleOutcomeError(
            f"Outcome {outcome} on '{qubit}' has probability {probability:.3g}."
        )
    collapsed = StateVector(state.register, tensor.reshape(-1) / math.sqrt(probability))
    return probability, collapsed


# ── Measurement settings and sampling ────────────────────────────────────

_OUTCOME_SYMBOLS = {"X": ("+", "-"), "Y": ("+i", "-i"), "Z": ("0", "1")}

# Rotations taking each Pauli eigenbasis to the computational basis.
_ROTATIONS = {
    "X": _BASE_1Q["H"],
    "Y": _BASE_1Q["H"] @ _BASE_1Q["SDG"],
    "Z": _BASE_1Q["I"],
}


@dataclass(frozen=True)
class MeasurementSetting:
    """One Pauli basis per measured qubit, e.g. ``MeasurementSetting(("A", "b"), "XZ")``."""

    qubits: tuple[str, ...]
    bases: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(self.qubits) != len(self.bases):
            raise ValidationError(
                f"Setting '{self.bases}' needs one basis per qubit in {self.qubits}."
            )
        if set(self.bases) - set("XYZ"):
            raise ValidationError(f"Bases must be drawn from X, Y, Z, got '{self.bases}'.")
        if len(set(self.qubits)) != len(self.qubits):
            raise RegisterError(f"Measured qubits must be distinct, got {self.qubits}.")

    def outcome_label(self, bits: str) -> str:
        """Render a bitstring as eigenvalue symbols (0/1, +/-, +i/-i)."""
        return "".join(_OUTCOME_SYMBOLS[b][int(bit)] for b, bit in zip(self.bases, bits))

    def rotation(self) -> ComplexMatrix:
        return kron(*(_ROTATIONS[b] for b in self.bases))


def born_probabilities(state: Union[StateVector, DensityMatrix],
                       setting: MeasurementSetting) -> np.ndarray:
    """Outcome distribution of *setting*, indexed by bitstrings in setting order."""
    reduced = reduce_state(state, setting.qubits)
    # bring the reduced state into setting order before rotating
    order = [reduced.register.index(q) for q in setting.qubits]
    k = len(order)
    matrix = reduced.matrix.reshape([2] * (2 * k)).transpose(order + [k + i for i in order])
    matrix = matrix.reshape(2 ** k, 2 ** k)
    rotation = setting.rotation()
    probabilities = np.real(np.diag(rotation @ matrix @ rotation.conj().T))
    probabilities = np.clip(probabilities, 0.0, None)
    return probabilities / probabilities.sum()


def draw_outcomes(probabilities: np.ndarray, shots: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Per-shot outcome indices drawn from *probabilities*."""
    if shots < 1:
        raise DomainError(f"shots must be at least 1, got {shots}.")
    return rng.choice(len(probabilities), size=shots, p=probabilities)


def tally(outcomes: np.ndarray, n_bits: int) -> dict[str, int]:
    """Counts keyed by zero-padded bitstrings; unobserved outcomes omitted."""
    counts = np.bincount(outcomes, minlength=2 ** n_bits)
    return {format(i, f"0{n_bits}b"): int(c) for i, c in enumerate(counts) if c}


def sample_counts(state: Union[StateVector, DensityMatrix], setting: MeasurementSetting,
                  shots: int, seed: int) -> dict[str, int]:
    """Simulate *shots* measurements of *setting*; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    probabilities = born_probabilities(state, setting)
    return tally(draw_outcomes(probabilities, shots, rng), len(setting.qubits))
