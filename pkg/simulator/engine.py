"""RQC engine: dispatcher module.

Evaluates one point of a theta sweep either exactly (density-matrix
evaluation of the circuit) or through simulated tomography, based on the
*mode* parameter.  Both return the same flat row records, one per reported
target of the scenario.
"""

from __future__ import annotations

import logging
from typing import Optional, Union

from simulator.errors import DomainError
from simulator.measures import irreality
from simulator.rqc import (
    RqcConfig,
    Scenario,
    bob_state,
    circuit_state,
    predicted_irreality,
)
from simulator.tomography import ReadoutNoiseModel, reconstruct

logger = logging.getLogger(__name__)

MODES = ("exact", "tomography")

ROW_FIELDS = (
    "theta_rad", "scenario", "qwp", "target",
    "irreality_exact", "irreality_predicted", "irreality_est", "irreality_std",
    "shots", "repetitions", "mitigated", "seed",
)


def _base_rows(theta: float, scenario: Scenario, config: RqcConfig) -> list[dict]:
    rho = bob_state(scenario, config)
    rows = []
    for target in scenario.targets:
        row = dict.fromkeys(ROW_FIELDS)
        row.update(
            theta_rad=float(theta),
            scenario=scenario.stage,
            qwp=scenario.qwp,
            target=target,
            irreality_exact=irreality(rho, target),
            irreality_predicted=predicted_irreality(scenario, config, target),
        )
        rows.append(row)
    return rows


def evaluate_point(theta: float, *, mode: str = "exact",
                   scenario: Union[Scenario, str] = "stage2/in", atoms: int = 2,
                   shots: int = 8192, repetitions: int = 10, readout_p: float = 0.0,
                   mitigate: bool = False, seed: int = 1234, stream: int = 0,
                   condition: Optional[tuple[str, int]] = None) -> list[dict]:
    """Rows for one theta, ordered by the scenario's targets.

    Parameters
    ----------
    mode : str
        ``"exact"`` (default) evaluates Bob's post-selected state directly.
        ``"tomography"`` additionally reconstructs the branch state from
        simulated shots and reports the mean and spread of the estimates.
    stream : int
        Index of this point in the sweep; keeps the sampling streams of
        different points independent.
    """
    if mode not in MODES:
        raise DomainError(f"Unknown mode '{mode}' (expected {' or '.join(MODES)}).")
    scenario = Scenario.coerce(scenario)
    config = scenario.configure(RqcConfig(theta=theta, atoms=atoms))
    rows = _base_rows(theta, scenario, config)
    if mode == "exact":
        return rows

    qubits = scenario.tomography_qubits
    noise = ReadoutNoiseModel.uniform(len(qubits), readout_p) if readout_p > 0.0 else None
    report = reconstruct(
        circuit_state(scenario.branch, config), qubits, shots,
        noise=noise, mitigate=mitigate, repetitions=repetitions, seed=seed,
        targets=scenario.targets, condition=condition, stream=stream,
    )
    mean, std = report.mean, report.std
    for row in rows:
        row.update(
            irreality_est=mean[row["target"]],
            irreality_std=std[row["target"]],
            shots=shots,
            repetitions=repetitions,
            mitigated=mitigate,
            seed=seed,
        )
    logger.debug("theta=%.6g %s: %s", theta, scenario, mean)
    return rows
