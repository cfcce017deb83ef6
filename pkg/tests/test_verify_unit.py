import pytest

from simulator.errors import DomainError
from simulator.verify import corrupt_gate, run_verification, theta_grid


def test_verification_passes_on_the_correct_circuit() -> None:
    seen = []
    trail = run_verification(steps=5, samples=12, progress=seen.append)
    summary = trail["summary"]
    assert summary["failed"] == 0, [c for c in trail["checks"] if not c["passed"]]
    assert summary["validation_status"] == "pass"
    assert summary["total"] == len(trail["checks"]) == len(seen)
    assert set(summary) == {"total", "failed", "runtime_ms", "validation_status"}
    names = [c["name"] for c in trail["checks"]]
    assert "stage psi5_branch vs closed form" in names
    assert "timing of Alice's intervention" in names


@pytest.mark.parametrize("gate", ["BS", "QWP", "MIRROR"])
def test_corrupted_gate_is_detected(gate: str) -> None:
    trail = run_verification(steps=3, overrides=corrupt_gate(gate), samples=3)
    assert trail["summary"]["failed"] > 0
    assert trail["summary"]["validation_status"] == "fail"


def test_corrupt_gate_keeps_arity() -> None:
    assert corrupt_gate("CNOT")["CNOT"].arity == 2
    assert corrupt_gate("X")["X"].arity == 1
    with pytest.raises(DomainError, match="Unknown circuit gate 'PBS'"):
        corrupt_gate("PBS")


def test_theta_grid_is_inclusive() -> None:
    grid = theta_grid(33)
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(1.5707963267948966)
    assert len(grid) == 33


def test_trail_required_fields_type_and_range_checks() -> None:
    trail = run_verification(steps=2, samples=3)
    assert set(trail) == {"checks", "summary"}
    for check in trail["checks"]:
        assert isinstance(check["name"], str)
        assert isinstance(check["passed"], bool)
        assert isinstance(check["detail"], str)
    summary = trail["summary"]
    assert isinstance(summary["runtime_ms"], float) and summary["runtime_ms"] >= 0
    assert isinstance(summary["total"], int) and summary["total"] > 0
    assert isinstance(summary["failed"], int) and 0 <= summary["failed"] <= summary["total"]
    assert summary["validation_status"] in {"pass", "fail"}
