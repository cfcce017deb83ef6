import math

import numpy as np
import pytest

from simulator.engine import ROW_FIELDS, evaluate_point
from simulator.errors import DomainError


def test_exact_row_has_every_field() -> None:
    rows = evaluate_point(math.pi / 2, scenario="stage2/in")
    assert len(rows) == 1
    row = rows[0]
    assert tuple(row) == ROW_FIELDS
    assert row["scenario"] == "stage2"
    assert row["qwp"] == "in"
    assert row["target"] == "b"
    assert row["irreality_exact"] == pytest.approx(1.0, abs=1e-10)
    assert row["irreality_predicted"] == pytest.approx(1.0, abs=1e-12)
    for key in ("irreality_est", "irreality_std", "shots", "repetitions", "mitigated", "seed"):
        assert row[key] is None


def test_stage5_reports_both_atoms() -> None:
    rows = evaluate_point(math.pi / 3, scenario="stage5/in")
    assert [r["target"] for r in rows] == ["e1", "e2"]
    for row in rows:
        assert row["irreality_exact"] == pytest.approx(0.811278, abs=1e-6)


def test_without_qwp_irreality_vanishes() -> None:
    for scenario in ("stage2/out", "stage5/out"):
        for row in evaluate_point(1.0, scenario=scenario):
            assert row["irreality_exact"] == pytest.approx(0.0, abs=1e-10)
            assert row["irreality_predicted"] == 0.0


def test_one_atom_leaves_second_atom_real() -> None:
    e1, e2 = evaluate_point(math.pi / 2, scenario="stage5/in", atoms=1)
    assert e1["irreality_exact"] == pytest.approx(1.0, abs=1e-10)
    assert e2["irreality_exact"] == pytest.approx(0.0, abs=1e-10)


def test_theta_is_a_plain_float() -> None:
    row = evaluate_point(np.float64(0.25))[0]
    assert type(row["theta_rad"]) is float


def test_invalid_inputs() -> None:
    with pytest.raises(DomainError, match="Unknown mode"):
        evaluate_point(0.5, mode="analytic")
    with pytest.raises(DomainError, match="theta"):
        evaluate_point(2.0)
    with pytest.raises(DomainError):
        evaluate_point(0.5, scenario="stage4/in")
    with pytest.raises(DomainError, match="atoms"):
        evaluate_point(0.5, atoms=3)


def test_tomography_estimate_tracks_exact_value() -> None:
    row = evaluate_point(math.pi / 2, mode="tomography", scenario="stage2/in",
                         shots=8192, repetitions=3, seed=1234)[0]
    assert row["irreality_est"] == pytest.approx(row["irreality_exact"], abs=0.07)
    assert row["irreality_std"] >= 0.0
    assert row["shots"] == 8192
    assert row["repetitions"] == 3
    assert row["mitigated"] is False
    assert row["seed"] == 1234


def test_tomography_is_reproducible_per_stream() -> None:
    kwargs = dict(mode="tomography", scenario="stage2/in", shots=400, repetitions=2, seed=7)
    first = evaluate_point(0.8, **kwargs)
    assert first == evaluate_point(0.8, **kwargs)
    assert first != evaluate_point(0.8, stream=1, **kwargs)


def test_tomography_with_readout_noise_and_mitigation() -> None:
    rows = evaluate_point(math.pi / 2, mode="tomography", scenario="stage2/in", shots=8192,
                          repetitions=2, readout_p=0.05, mitigate=True, seed=3)
    assert rows[0]["mitigated"] is True
    assert rows[0]["irreality_est"] == pytest.approx(1.0, abs=0.12)


@pytest.mark.parametrize("scenario", ["stage2/in", "stage2/out", "stage5/in", "stage5/out"])
@pytest.mark.parametrize("theta", [0.0, math.pi / 4, math.pi / 2])
def test_noiseless_tomography_follows_the_exact_curve(theta: float, scenario: str) -> None:
    rows = evaluate_point(theta, mode="tomography", scenario=scenario, shots=8192,
                          repetitions=10, seed=1234)
    for row in rows:
        assert abs(row["irreality_est"] - row["irreality_exact"]) < 0.05, row
        assert row["irreality_std"] > 0.0


@pytest.mark.parametrize("scenario", ["stage2/in", "stage5/in"])
def test_mitigation_lowers_mean_error_over_paired_seeds(scenario: str) -> None:
    errors = {False: [], True: []}
    for seed in range(10):
        for mitigate in (False, True):
            rows = evaluate_point(math.pi / 2, mode="tomography", scenario=scenario, shots=8192,
                                  repetitions=1, readout_p=0.02, mitigate=mitigate, seed=seed)
            errors[mitigate].extend(abs(r["irreality_est"] - r["irreality_exact"]) for r in rows)
    assert np.mean(errors[True]) < np.mean(errors[False])
