import math

import numpy as np
import pytest

from simulator import circuit
from simulator.circuit import Circuit, Gate, MeasurementSetting, standard_gate
from simulator.errors import (
    DomainError,
    GateError,
    ImpossibleOutcomeError,
    RegisterError,
    ValidationError,
)
from simulator.qmath import StateVector, kron, random_unitary

R2 = 1 / math.sqrt(2)


def _apply_1q(name: str, ket: str) -> np.ndarray:
    psi = StateVector.from_label(("q",), ket)
    return circuit.apply_gate(psi, standard_gate(name), "q").amplitudes


@pytest.mark.parametrize(
    "name,ket,expected",
    [
        ("X", "0", [0, 1]),
        ("H", "1", [R2, -R2]),
        ("S", "1", [0, 1j]),
        ("SDG", "1", [0, -1j]),
        ("MIRROR", "0", [0, 1j]),
        ("MIRROR", "1", [1j, 0]),
        ("BS", "0", [R2, 1j * R2]),
        ("BS", "1", [1j * R2, R2]),
        ("QWP", "0", [R2, 1j * R2]),
        ("QWP", "1", [R2, -1j * R2]),
    ],
)
def test_standard_gate_images(name: str, ket: str, expected: list) -> None:
    assert np.allclose(_apply_1q(name, ket), expected, atol=1e-12)


def test_ry_rotation() -> None:
    gate = standard_gate("RY", math.pi / 2)
    assert np.allclose(gate.unitary[:, 0], [R2, R2])
    assert np.allclose(standard_gate("RY", 0.0).unitary, np.eye(2))
    with pytest.raises(GateError, match="one angle"):
        standard_gate("RY")


def test_gate_validation() -> None:
    with pytest.raises(GateError, match="Unknown gate 'FOO'"):
        standard_gate("FOO")
    with pytest.raises(GateError, match="no parameters"):
        standard_gate("X", 1.0)
    with pytest.raises(GateError, match="not unitary"):
        Gate("bad", [[1, 1], [0, 1]])
    with pytest.raises(GateError, match="2x2 or 4x4"):
        Gate("big", np.eye(8))
    assert standard_gate("cnot").arity == 2


def test_controlled_gates_take_control_first() -> None:
    psi = StateVector.from_label(("A", "B"), "10")
    cnot = standard_gate("CNOT")
    assert circuit.apply_gate(psi, cnot, ("A", "B")).amplitudes[0b11] == 1
    assert circuit.apply_gate(psi, cnot, ("B", "A")).amplitudes[0b10] == 1

    spread = StateVector.from_label(("A", "x", "B"), "001")
    flipped = circuit.apply_gate(spread, cnot, ("B", "A"))
    assert flipped.amplitudes[0b101] == 1

    cy = circuit.apply_gate(StateVector.from_label(("A", "B"), "10"), standard_gate("CY"), ("A", "B"))
    assert cy.amplitudes[0b11] == pytest.approx(1j)
    cz = circuit.apply_gate(StateVector.from_label(("A", "B"), "11"), standard_gate("CZ"), ("A", "B"))
    assert cz.amplitudes[0b11] == pytest.approx(-1)


def test_apply_gate_matches_kron_embedding() -> None:
    rng = np.random.default_rng(11)
    register = ("q0", "q1", "q2")
    psi = StateVector.normalized(register, rng.normal(size=8) + 1j * rng.normal(size=8))
    u = random_unitary(2, rng)
    out = circuit.apply_gate(psi, Gate("U", u), "q1")
    assert np.allclose(out.amplitudes, kron(np.eye(2), u, np.eye(2)) @ psi.amplitudes)

    v = random_unitary(4, rng)
    out = circuit.apply_gate(psi, Gate("V", v), ("q0", "q1"))
    assert np.allclose(out.amplitudes, kron(v, np.eye(2)) @ psi.amplitudes)


def test_apply_gate_errors() -> None:
    psi = StateVector.from_label(("A", "B"), "00")
    with pytest.raises(GateError, match="acts on 2"):
        circuit.apply_gate(psi, standard_gate("CNOT"), "A")
    with pytest.raises(RegisterError, match="distinct"):
        circuit.apply_gate(psi, standard_gate("CNOT"), ("A", "A"))
    with pytest.raises(RegisterError, match="Unknown qubit label 'x'"):
        circuit.apply_gate(psi, standard_gate("X"), "x")


def test_random_circuits_preserve_norm() -> None:
    rng = np.random.default_rng(3)
    register = ("q0", "q1", "q2", "q3")
    state = StateVector.from_label(register, "0000")
    for _ in range(500):
        if rng.random() < 0.5:
            targets = (register[int(rng.integers(4))],)
            gate = Gate("U", random_unitary(2, rng))
        else:
            i, j = rng.choice(4, size=2, replace=False)
            targets = (register[int(i)], register[int(j)])
            gate = Gate("V", random_unitary(4, rng))
        state = circuit.apply_gate(state, gate, targets)
    assert np.vdot(state.amplitudes, state.amplitudes).real == pytest.approx(1.0, abs=1e-10)


def test_circuit_markers_and_snapshots() -> None:
    c = Circuit(("A", "B"))
    with pytest.raises(ValidationError, match="before any step"):
        c.mark("start")
    c.append(standard_gate("H"), "A").mark("superposed")
    c.append(standard_gate("CNOT"), "A", "B").mark("bell")
    with pytest.raises(ValidationError, match="does not follow"):
        c.mark("again")

    final, snapshots = circuit.run_with_snapshots(c, StateVector.from_label(("A", "B"), "00"))
    assert list(snapshots) == ["superposed", "bell"]
    assert np.allclose(snapshots["superposed"].amplitudes, [R2, 0, R2, 0])
    assert np.allclose(final.amplitudes, [R2, 0, 0, R2])
    assert snapshots["bell"] is final


def test_circuit_validation() -> None:
    c = Circuit(("A", "B"))
    with pytest.raises(RegisterError, match="Unknown qubit label 'z'"):
        c.append(standard_gate("X"), "z")
    with pytest.raises(GateError):
        c.append(standard_gate("X"), "A", "B")
    with pytest.raises(RegisterError, match="Duplicate"):
        Circuit(("A", "A"))
    with pytest.raises(RegisterError, match="does not match"):
        circuit.run_with_snapshots(c, StateVector.from_label(("B", "A"), "00"))


def test_empty_circuit_returns_initial_state() -> None:
    initial = StateVector.from_label(("A",), "1")
    final, snapshots = circuit.run_with_snapshots(Circuit(("A",)), initial)
    assert final is initial
    assert snapshots == {}


def test_post_select() -> None:
    bell = StateVector.normalized(("A", "B"), [1, 0, 0, 1])
    probability, collapsed = circuit.post_select(bell, "A", 1)
    assert probability == pytest.approx(0.5)
    assert collapsed.register == ("A", "B")
    assert np.allclose(collapsed.amplitudes, [0, 0, 0, 1])

    with pytest.raises(ImpossibleOutcomeError, match="probability"):
        circuit.post_select(StateVector.from_label(("A",), "0"), "A", 1)
    with pytest.raises(DomainError):
        circuit.post_select(bell, "A", -1)


def test_measurement_setting_validation_and_labels() -> None:
    setting = MeasurementSetting(("A", "b", "e1"), "XYZ")
    assert setting.outcome_label("011") == "+-i1"
    assert setting.outcome_label("100") == "-+i0"
    with pytest.raises(ValidationError, match="one basis per qubit"):
        MeasurementSetting(("A",), "XY")
    with pytest.raises(ValidationError, match="X, Y, Z"):
        MeasurementSetting(("A",), "W")
    with pytest.raises(RegisterError):
        MeasurementSetting(("A", "A"), "ZZ")


@pytest.mark.parametrize(
    "amplitudes,basis",
    [([1, 0], "Z"), ([R2, R2], "X"), ([R2, 1j * R2], "Y")],
)
def test_sample_counts_on_basis_eigenstates(amplitudes: list, basis: str) -> None:
    psi = StateVector(("q",), amplitudes)
    counts = circuit.sample_counts(psi, MeasurementSetting(("q",), basis), shots=500, seed=1)
    assert counts == {"0": 500}


def test_sample_counts_follow_the_born_rule() -> None:
    omega_plus = circuit.apply_gate(StateVector.from_label(("b",), "0"), standard_gate("BS"), "b")
    shots = 10000
    counts = circuit.sample_counts(omega_plus, MeasurementSetting(("b",), "Z"), shots=shots, seed=7)
    sigma = math.sqrt(0.25 / shots)
    assert abs(counts.get("0", 0) / shots - 0.5) < 3 * sigma


def test_sample_counts_is_deterministic_per_seed() -> None:
    psi = StateVector.normalized(("A", "B"), [1, 1j, 0.5, -1])
    setting = MeasurementSetting(("A", "B"), "XY")
    first = circuit.sample_counts(psi, setting, shots=1000, seed=42)
    assert first == circuit.sample_counts(psi, setting, shots=1000, seed=42)
    assert sum(first.values()) == 1000
    with pytest.raises(DomainError, match="shots"):
        circuit.sample_counts(psi, setting, shots=0, seed=1)


def test_born_probabilities_follow_setting_order() -> None:
    psi = StateVector.from_label(("A", "B", "C"), "010")
    probabilities = circuit.born_probabilities(psi, MeasurementSetting(("B", "A"), "ZZ"))
    assert np.allclose(probabilities, [0, 0, 1, 0])
    from_density = circuit.born_probabilities(psi.density(), MeasurementSetting(("B", "A"), "ZZ"))
    assert np.allclose(from_density, probabilities)
