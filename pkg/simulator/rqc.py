"""The reality quantum correlator experiment as a gate circuit.

Photon A (polarization ``A``, path ``a``) goes to Alice; photon B
(polarization ``B``, path ``b``) enters Bob's Mach-Zehnder interferometer
where two atoms (``e1``, ``e2``) sit one in each arm.  Alice either inserts a
quarter-wave plate before her polarizing beam splitter (``qwp_in``) or not,
and that choice decides whether Bob's path and the atom energies are
elements of reality.

Alice can act right after Bob's HWP ("stage2" timeline) or after Bob's
beam splitter ("stage5" timeline).  Her gates touch only A and a, so both
timelines end in the same state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import total_ordering
from typing import Mapping, Optional, Union

from simulator.circuit import Circuit, Gate, post_select, run_with_snapshots, standard_gate
from simulator.errors import DomainError, RegisterError
from simulator.measures import coherence_rel_entropy
from simulator.oracles import oracle_amplitudes, xi_amplitudes
from simulator.qmath import DensityMatrix, StateVector, binary_entropy, partial_trace, reduce_state

logger = logging.getLogger(__name__)

REGISTER = ("A", "a", "B", "b", "e1", "e2")
ALICE = ("A", "a")
BOB = ("B", "b", "e1", "e2")

THETA_MAX = math.pi / 2
_THETA_TOL = 1e-12

INTERVENTIONS = ("stage2", "stage5")


# ── Configuration ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RqcConfig:
    """One experiment: source angle, Alice's arrangement, atom count, detector branches."""

    theta: float
    qwp_in: bool = False
    atoms: int = 2
    post_select_a: Optional[int] = None
    post_select_b: Optional[int] = None
    intervention: str = "stage5"

    def __post_init__(self) -> None:
        theta = float(self.theta)
        if not math.isfinite(theta) or theta < -_THETA_TOL or theta > THETA_MAX + _THETA_TOL:
            raise DomainError(f"theta must lie in [0, pi/2], got {self.theta!r}.")
        object.__setattr__(self, "theta", min(max(theta, 0.0), THETA_MAX))
        if self.atoms not in (1, 2):
            raise DomainError(f"atoms must be 1 or 2, got {self.atoms!r}.")
        for name in ("post_select_a", "post_select_b"):
            value = getattr(self, name)
            if value not in (None, 0, 1):
                raise DomainError(f"{name} must be 0, 1 or None, got {value!r}.")
        if self.intervention not in INTERVENTIONS:
            raise DomainError(
                f"intervention must be one of {', '.join(INTERVENTIONS)}, got {self.intervention!r}."
            )

    @property
    def c(self) -> float:
        return math.cos(self.theta / 2)

    @property
    def s(self) -> float:
        return math.sin(self.theta / 2)


@total_ordering
class StageId(Enum):
    """Snapshot points, declared in circuit order."""

    PSI0 = "psi0"
    PSI1 = "psi1"
    PSI2 = "psi2"
    PSI2_BRANCH = "psi2_branch"
    PSI3 = "psi3"
    PSI4 = "psi4"
    PSI5 = "psi5"
    PSI5_BRANCH = "psi5_branch"

    @property
    def position(self) -> int:
        return list(StageId).index(self)

    @property
    def timeline(self) -> str:
        return "stage2" if self is StageId.PSI2_BRANCH else "stage5"

    def __lt__(self, other: "StageId") -> bool:
        if not isinstance(other, StageId):
            return NotImplemented
        return self.position < other.position

    @classmethod
    def parse(cls, text: Union[str, "StageId"]) -> "StageId":
        if isinstance(text, StageId):
            return text
        key = str(text).strip().lower().replace("Ψ", "psi").replace("ψ", "psi")
        try:
            return cls(key)
        except ValueError:
            known = ", ".join(s.value for s in cls)
            raise DomainError(f"Unknown stage '{text}'. Known stages: {known}.") from None


@dataclass(frozen=True)
class Scenario:
    """Analysis point (stage2 or stage5) crossed with Alice's QWP choice."""

    stage: str
    qwp: str

    def __post_init__(self) -> None:
        if self.stage not in INTERVENTIONS:
            raise DomainError(f"Unknown scenario stage '{self.stage}' (expected stage2 or stage5).")
        if self.qwp not in ("in", "out"):
            raise DomainError(f"Unknown QWP arrangement '{self.qwp}' (expected in or out).")

    @classmethod
    def coerce(cls, value: Union[str, "Scenario"]) -> "Scenario":
        if isinstance(value, Scenario):
            return value
        parts = str(value).strip().lower().split("/")
        if len(parts) != 2:
            raise DomainError(f"Scenario must look like 'stage2/in', got {value!r}.")
        return cls(*parts)

    @property
    def qwp_in(self) -> bool:
        return self.qwp == "in"

    @property
    def branch(self) -> StageId:
        return StageId.PSI2_BRANCH if self.stage == "stage2" else StageId.PSI5_BRANCH

    @property
    def targets(self) -> tuple[str, ...]:
        """Bob's observables reported for this scenario."""
        return ("b",) if self.stage == "stage2" else ("e1", "e2")

    @property
    def tomography_qubits(self) -> tuple[str, ...]:
        return ("A", "b") if self.stage == "stage2" else ("A", "b", "e1", "e2")

    def configure(self, config: RqcConfig) -> RqcConfig:
        return replace(config, qwp_in=self.qwp_in, intervention=self.stage)

    def __str__(self) -> str:
        return f"{self.stage}/{self.qwp}"


SCENARIOS = tuple(Scenario(stage, qwp) for stage in INTERVENTIONS for qwp in ("in", "out"))


# ── Circuit construction ─────────────────────────────────────────────────

def gate_table(config: RqcConfig, overrides: Optional[Mapping[str, Gate]] = None) -> dict[str, Gate]:
    """Gates used by ``build_rqc``; *overrides* swaps entries by name."""
    gates = {name: standard_gate(name) for name in ("X", "CNOT", "CZ", "CY", "MIRROR", "BS", "QWP")}
    gates["RY"] = standard_gate("RY", config.theta)
    for name, gate in (overrides or {}).items():
        if name not in gates:
            raise DomainError(f"Cannot override unknown gate '{name}'. Known: {', '.join(gates)}.")
        gates[name] = gate
    return gates


def _pbs(circuit: Circuit, gates: Mapping[str, Gate], polarization: str, path: str) -> None:
    circuit.append(gates["CZ"], polarization, path)
    circuit.append(gates["CY"], polarization, path)


def _alice(circuit: Circuit, gates: Mapping[str, Gate], config: RqcConfig) -> None:
    if config.qwp_in:
        circuit.append(gates["QWP"], "A")
    _pbs(circuit, gates, "A", "a")


def build_rqc(config: RqcConfig, overrides: Optional[Mapping[str, Gate]] = None) -> Circuit:
    """Gate sequence of the experiment with a marker at every stage of the timeline."""
    gates = gate_table(config, overrides)
    stage5 = config.intervention == "stage5"
    circuit = Circuit(REGISTER)

    # BBO' source, then both atoms excited
    circuit.append(gates["RY"], "A").append(gates["CNOT"], "A", "B").append(gates["X"], "B")
    circuit.append(gates["X"], "e1")
    if config.atoms == 2:
        circuit.append(gates["X"], "e2")
    circuit.mark(StageId.PSI0)

    _pbs(circuit, gates, "B", "b")
    circuit.mark(StageId.PSI1)

    circuit.append(gates["CNOT"], "b", "B")  # HWP
    circuit.mark(StageId.PSI2)

    if not stage5:
        _alice(circuit, gates, config)
        circuit.mark(StageId.PSI2_BRANCH)

    # PAI: atom 1 sits in the upper arm (b = 0), atom 2 in the lower arm
    circuit.append(gates["X"], "b").append(gates["CNOT"], "b", "e1").append(gates["X"], "b")
    if config.atoms == 2:
        circuit.append(gates["CNOT"], "b", "e2")
    if stage5:
        circuit.mark(StageId.PSI3)

    circuit.append(gates["MIRROR"], "b")
    if stage5:
        circuit.mark(StageId.PSI4)

    circuit.append(gates["BS"], "b")
    if stage5:
        circuit.mark(StageId.PSI5)
        _alice(circuit, gates, config)
        circuit.mark(StageId.PSI5_BRANCH)

    logger.debug("Built RQC circuit: %d steps, theta=%.6g, qwp_in=%s, atoms=%d, timeline=%s",
                 len(circuit), config.theta, config.qwp_in, config.atoms, config.intervention)
    return circuit


def initial_state() -> StateVector:
    return StateVector.from_label(REGISTER, "0" * len(REGISTER))


def final_state(config: RqcConfig, overrides: Optional[Mapping[str, Gate]] = None) -> StateVector:
    state, _ = run_with_snapshots(build_rqc(config, overrides), initial_state())
    return state


def stage_snapshots(config: RqcConfig, overrides: Optional[Mapping[str, Gate]] = None
                    ) -> dict[StageId, StateVector]:
    """Snapshots of every stage; Psi2_branch comes from the stage-2 timeline."""
    snapshots: dict[StageId, StateVector] = {}
    for timeline in INTERVENTIONS:
        _, taken = run_with_snapshots(
            build_rqc(replace(config, intervention=timeline), overrides), initial_state()
        )
        snapshots.update(taken)
    return dict(sorted(snapshots.items()))


def circuit_state(stage: Union[StageId, str], config: RqcConfig,
                  overrides: Optional[Mapping[str, Gate]] = None) -> StateVector:
    """Circuit snapshot at *stage*, run on the timeline that carries it."""
    stage = StageId.parse(stage)
    timeline_config = replace(config, intervention=stage.timeline)
    _, snapshots = run_with_snapshots(build_rqc(timeline_config, overrides), initial_state())
    return snapshots[stage]


def oracle_state(stage: Union[StageId, str], config: RqcConfig) -> StateVector:
    """Closed-form state of *stage*, evaluated without the circuit engine."""
    stage = StageId.parse(stage)
    amplitudes = oracle_amplitudes(stage.value, config.qwp_in, config.atoms, config.theta)
    return StateVector(REGISTER, amplitudes)


# ── Post-selection and Bob's state ───────────────────────────────────────

def _selections(scenario: Scenario, config: RqcConfig) -> list[tuple[str, int]]:
    selections = [("a", 0 if config.post_select_a is None else config.post_select_a)]
    if scenario.stage == "stage5":
        selections.append(("b", 0 if config.post_select_b is None else config.post_select_b))
    elif config.post_select_b is not None:
        selections.append(("b", config.post_select_b))
    return selections


def post_selected_state(scenario: Union[Scenario, str], config: RqcConfig
                        ) -> tuple[float, StateVector]:
    """Joint probability of the scenario's detector clicks and the collapsed state."""
    scenario = Scenario.coerce(scenario)
    state = circuit_state(scenario.branch, scenario.configure(config))
    probability = 1.0
    for qubit, outcome in _selections(scenario, config):
        p, state = post_select(state, qubit, outcome)
        probability *= p
    logger.debug("Post-selected %s at theta=%.6g with probability %.6g",
                 scenario, config.theta, probability)
    return probability, state


def bob_state(scenario: Union[Scenario, str], config: RqcConfig) -> DensityMatrix:
    """State accessible from Bob's location: Alice's qubits traced out."""
    _, state = post_selected_state(scenario, config)
    return partial_trace(state.density(), ALICE)


def reduced_branch_state(scenario: Union[Scenario, str], config: RqcConfig) -> DensityMatrix:
    """Un-post-selected branch state reduced to the scenario's tomography qubits."""
    scenario = Scenario.coerce(scenario)
    state = circuit_state(scenario.branch, scenario.configure(config))
    return reduce_state(state, scenario.tomography_qubits)


def predicted_irreality(scenario: Union[Scenario, str], config: RqcConfig,
                        target: Optional[str] = None) -> float:
    """Closed-form irreality: 0 without the QWP, h(cos^2(theta/2)) with it."""
    scenario = Scenario.coerce(scenario)
    if target is not None and target not in scenario.targets:
        raise RegisterError(
            f"Target '{target}' is not reported for {scenario} "
            f"(targets: {', '.join(scenario.targets)})."
        )
    if not scenario.qwp_in:
        return 0.0
    if config.atoms == 1 and target == "e2":
        return 0.0
    return float(binary_entropy(config.c ** 2))


def mzi_output_state(config: RqcConfig) -> StateVector:
    """Interferometer output when Alice acts at stage 2, post-selected on her path."""
    outcome = 0 if config.post_select_a is None else config.post_select_a
    state = final_state(replace(config, intervention="stage2"))
    _, collapsed = post_select(state, "a", outcome)
    return collapsed


def mzi_output_oracle(config: RqcConfig) -> StateVector:
    return StateVector(REGISTER, oracle_amplitudes("mzi_output", config.qwp_in, config.atoms,
                                                   config.theta))


def xi_state(config: RqcConfig, sign: int = +1) -> StateVector:
    """Atom state s|e_s> +/- c|e_c> over (e1, e2)."""
    return StateVector(("e1", "e2"), xi_amplitudes(sign, config.atoms, config.theta))


def one_atom_coherence(theta: float) -> float:
    """Coherence of e1 with a single atom, QWP in, after clicks a=0 and b=0."""
    config = RqcConfig(theta=theta, qwp_in=True, atoms=1)
    return coherence_rel_entropy(bob_state("stage5/in", config), "e1")
