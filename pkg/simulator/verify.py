"""Self-check suite: circuit snapshots against the closed forms, plus the
identities the measures must satisfy.

``run_verification`` returns a trail dict::

    {"checks": [{"name", "passed", "detail"}, ...],
     "summary": {"total", "failed", "runtime_ms", "validation_status"}}
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import replace
from typing import Callable, Mapping, Optional

import numpy as np

from simulator.circuit import Gate
from simulator.errors import DomainError
from simulator.measures import (
    coherence_raw,
    dephase,
    discord_raw,
    entanglement_entropy,
    irreality,
    irreality_raw,
)
from simulator.qmath import binary_entropy, random_density_matrix, state_fidelity
from simulator.rqc import (
    SCENARIOS,
    RqcConfig,
    StageId,
    bob_state,
    final_state,
    gate_table,
    mzi_output_oracle,
    mzi_output_state,
    one_atom_coherence,
    oracle_state,
    predicted_irreality,
    reduced_branch_state,
    stage_snapshots,
    xi_state,
)

logger = logging.getLogger(__name__)

FIDELITY_TOL = 1e-12
VALUE_TOL = 1e-10
REDUCTION_THETAS = (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2)


def theta_grid(steps: int = 33) -> np.ndarray:
    return np.linspace(0.0, math.pi / 2, steps)


def corrupt_gate(name: str) -> dict[str, Gate]:
    """Override table replacing gate *name* with an identity of the same arity."""
    gates = gate_table(RqcConfig(theta=0.0))
    if name not in gates:
        raise DomainError(f"Unknown circuit gate '{name}'. Known: {', '.join(gates)}.")
    arity = gates[name].arity
    return {name: Gate(f"{name}*", np.eye(2 ** arity))}


def _check(name: str, passed: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


# ── Checks ───────────────────────────────────────────────────────────────

def _stage_checks(grid: np.ndarray, overrides: Optional[Mapping[str, Gate]]) -> list[dict]:
    worst = {stage: 1.0 for stage in StageId}
    for qwp_in in (False, True):
        for theta in grid:
            config = RqcConfig(theta=theta, qwp_in=qwp_in)
            for stage, snapshot in stage_snapshots(config, overrides).items():
                fidelity = state_fidelity(snapshot, oracle_state(stage, config))
                worst[stage] = min(worst[stage], fidelity)
    return [
        _check(f"stage {stage.value} vs closed form", f >= 1 - FIDELITY_TOL,
               f"min fidelity {f:.15f}")
        for stage, f in worst.items()
    ]


def _one_atom_stage_check(grid: np.ndarray, overrides: Optional[Mapping[str, Gate]]) -> dict:
    worst = 1.0
    for qwp_in in (False, True):
        for theta in grid:
            config = RqcConfig(theta=theta, qwp_in=qwp_in, atoms=1)
            for stage, snapshot in stage_snapshots(config, overrides).items():
                worst = min(worst, state_fidelity(snapshot, oracle_state(stage, config)))
    return _check("one-atom stages vs closed form", worst >= 1 - FIDELITY_TOL,
                  f"min fidelity {worst:.15f}")


def _mzi_check(grid: np.ndarray) -> dict:
    worst = 1.0
    for qwp_in in (False, True):
        for theta in grid:
            config = RqcConfig(theta=theta, qwp_in=qwp_in)
            worst = min(worst, state_fidelity(mzi_output_state(config), mzi_output_oracle(config)))
    return _check("interferometer output (stage-2 timeline)", worst >= 1 - FIDELITY_TOL,
                  f"min fidelity {worst:.15f}")


def _irreality_checks(grid: np.ndarray) -> list[dict]:
    checks = []
    for scenario in SCENARIOS:
        error = 0.0
        for theta in grid:
            config = RqcConfig(theta=theta)
            rho = bob_state(scenario, config)
            for target in scenario.targets:
                exact = irreality(rho, target)
                error = max(error, abs(exact - predicted_irreality(scenario, config, target)))
        checks.append(_check(f"irreality {scenario} vs closed form", error <= VALUE_TOL,
                             f"max error {error:.2e}"))
    return checks


def _reduction_checks() -> list[dict]:
    checks = []
    for scenario in SCENARIOS:
        error = 0.0
        for theta in REDUCTION_THETAS:
            config = RqcConfig(theta=theta)
            selected = bob_state(scenario, config)
            reduced = reduced_branch_state(scenario, config)
            for target in scenario.targets:
                error = max(error, abs(irreality(selected, target) - irreality(reduced, target)))
        checks.append(_check(f"subsystem reduction {scenario}", error <= VALUE_TOL,
                             f"max error {error:.2e}"))
    return checks


def _timing_check(grid: np.ndarray, overrides: Optional[Mapping[str, Gate]]) -> dict:
    worst = 1.0
    for qwp_in in (False, True):
        for theta in grid:
            config = RqcConfig(theta=theta, qwp_in=qwp_in)
            early = final_state(replace(config, intervention="stage2"), overrides)
            late = final_state(replace(config, intervention="stage5"), overrides)
            worst = min(worst, state_fidelity(early, late))
    return _check("timing of Alice's intervention", worst >= 1 - FIDELITY_TOL,
                  f"min fidelity {worst:.15f}")


def _entanglement_check(grid: np.ndarray) -> dict:
    error = 0.0
    for theta in grid:
        config = RqcConfig(theta=theta, qwp_in=True)
        entropy = entanglement_entropy(xi_state(config), ["e1"])
        error = max(error, abs(entropy - predicted_irreality("stage5/in", config, "e1")))
    return _check("atom entanglement equals irreality", error <= VALUE_TOL,
                  f"max error {error:.2e}")


def _one_atom_coherence_check(grid: np.ndarray) -> dict:
    error, positive = 0.0, True
    for theta in grid:
        value = one_atom_coherence(theta)
        error = max(error, abs(value - binary_entropy(math.cos(theta / 2) ** 2)))
        if theta > 0.0 and value <= 0.0:
            positive = False
    return _check("one-atom coherence", positive and error <= 1e-9,
                  f"positive={positive}, max error {error:.2e}")


def _measure_identity_check(samples: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst = {"decomposition": 0.0, "irreality": 0.0, "discord": 0.0, "idempotence": 0.0}
    for k in range(samples):
        n = 2 + k % 3
        register = tuple(f"q{i}" for i in range(n))
        rho = random_density_matrix(register, rng)
        target = register[int(rng.integers(n))]
        raw = irreality_raw(rho, target)
        worst["decomposition"] = max(
            worst["decomposition"], abs(raw - coherence_raw(rho, target) - discord_raw(rho, target))
        )
        worst["irreality"] = max(worst["irreality"], -raw)
        worst["discord"] = max(worst["discord"], -discord_raw(rho, target))
        once = dephase(rho, target)
        worst["idempotence"] = max(
            worst["idempotence"], float(np.max(np.abs(dephase(once, target).matrix - once.matrix)))
        )
    passed = (worst["decomposition"] <= VALUE_TOL and worst["irreality"] <= VALUE_TOL
              and worst["discord"] <= VALUE_TOL and worst["idempotence"] <= FIDELITY_TOL)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return _check(f"measure identities ({samples} random states)", passed, detail)


# ── Suite ────────────────────────────────────────────────────────────────

def run_verification(steps: int = 33, overrides: Optional[Mapping[str, Gate]] = None,
                     samples: int = 100, seed: int = 2024,
                     progress: Optional[Callable[[dict], None]] = None) -> dict:
    """Run every check; *overrides* swaps circuit gates (negative control)."""
    t_start = time.perf_counter()
    grid = theta_grid(steps)
    checks: list[dict] = []

    def record(items) -> None:
        for item in items if isinstance(items, list) else [items]:
            checks.append(item)
            logger.info("%s %s: %s", "PASS" if item["passed"] else "FAIL",
                        item["name"], item["detail"])
            if progress is not None:
                progress(item)

    record(_stage_checks(grid, overrides))
    record(_one_atom_stage_check(grid, overrides))
    record(_timing_check(grid, overrides))
    record(_mzi_check(grid))
    record(_irreality_checks(grid))
    record(_reduction_checks())
    record(_entanglement_check(grid))
    record(_one_atom_coherence_check(grid))
    record(_measure_identity_check(samples, seed))

    failed = sum(not c["passed"] for c in checks)
    runtime_ms = round((time.perf_counter() - t_start) * 1000, 2)
    return {
        "checks": checks,
        "summary": {
            "total": len(checks),
            "failed": failed,
            "runtime_ms": runtime_ms,
            "validation_status": "pass" if failed == 0 else "fail",
        },
    }
