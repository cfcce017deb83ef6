"""
RQC — Run configuration.

A run is described by a flat mapping whose keys are the ``run`` flag names
with underscores.  Values come from ``DEFAULT_RUN_SPEC``, then from an
optional JSON file, then from explicit flags.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Mapping, Optional

import numpy as np

from simulator.errors import ValidationError

# ── Default run ─────────────────────────────────────────────────────────
DEFAULT_RUN_SPEC = {
    "mode": "exact",            # "exact", "tomography"
    "scenario": "stage2",       # "stage2", "stage5"
    "qwp": "in",                # "in", "out"
    "theta_start": 0.0,
    "theta_stop": math.pi / 2,
    "steps": 33,
    "atoms": 2,
    "shots": 8192,
    "reps": 10,
    "readout_p": 0.0,
    "mitigate": False,
    "seed": 1234,
    "out": None,                # None writes to stdout
    "format": "csv",            # "csv", "json"
    "workers": 1,
}

_CHOICES = {
    "mode": ("exact", "tomography"),
    "scenario": ("stage2", "stage5"),
    "qwp": ("in", "out"),
    "format": ("csv", "json"),
}

_THETA_TOL = 1e-12


def _expect(key: str, value, kinds: tuple) -> None:
    # bool is an int subclass; only accept it where a bool is expected
    if isinstance(value, bool) and bool not in kinds:
        raise ValidationError(f"'{key}' must be {kinds[0].__name__}, got {value!r}.")
    if not isinstance(value, kinds):
        raise ValidationError(f"'{key}' must be {kinds[0].__name__}, got {value!r}.")


@dataclass(frozen=True)
class RunSpec:
    """Validated parameters of one ``run`` invocation."""

    mode: str
    scenario: str
    qwp: str
    theta_start: float
    theta_stop: float
    steps: int
    atoms: int
    shots: int
    reps: int
    readout_p: float
    mitigate: bool
    seed: int
    out: Optional[str]
    format: str
    workers: int

    def __post_init__(self) -> None:
        for key, choices in _CHOICES.items():
            value = getattr(self, key)
            if value not in choices:
                raise ValidationError(f"'{key}' must be one of {', '.join(choices)}, got {value!r}.")
        for key in ("theta_start", "theta_stop", "readout_p"):
            _expect(key, getattr(self, key), (float, int))
        for key in ("steps", "atoms", "shots", "reps", "seed", "workers"):
            _expect(key, getattr(self, key), (int,))
        _expect("mitigate", self.mitigate, (bool,))
        if self.out is not None:
            _expect("out", self.out, (str,))

        for key in ("theta_start", "theta_stop"):
            theta = float(getattr(self, key))
            if not math.isfinite(theta) or theta < -_THETA_TOL or theta > math.pi / 2 + _THETA_TOL:
                raise ValidationError(f"'{key}' must lie in [0, pi/2] radians, got {theta!r}.")
        if self.theta_start > self.theta_stop:
            raise ValidationError(
                f"'theta_start' ({self.theta_start!r}) must not exceed 'theta_stop' ({self.theta_stop!r})."
            )
        if self.steps < 1:
            raise ValidationError(f"'steps' must be at least 1, got {self.steps}.")
        if self.atoms not in (1, 2):
            raise ValidationError(f"'atoms' must be 1 or 2, got {self.atoms}.")
        if self.shots < 1 or self.reps < 1:
            raise ValidationError("'shots' and 'reps' must be at least 1.")
        if not 0.0 <= self.readout_p < 0.5:
            raise ValidationError(f"'readout_p' must lie in [0, 0.5), got {self.readout_p!r}.")
        if self.seed < 0:
            raise ValidationError(f"'seed' must be non-negative, got {self.seed}.")
        if self.workers < 1:
            raise ValidationError(f"'workers' must be at least 1, got {self.workers}.")

    @property
    def scenario_key(self) -> str:
        return f"{self.scenario}/{self.qwp}"

    def thetas(self) -> np.ndarray:
        """Inclusive evenly spaced grid."""
        return np.linspace(float(self.theta_start), float(self.theta_stop), self.steps)

    def to_dict(self) -> dict:
        return asdict(self)


# ── Loading and merging ──────────────────────────────────────────────────

def load_config_file(path: str) -> dict:
    """Read a flat JSON run configuration."""
    if not os.path.exists(path):
        raise ValidationError(f"Config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"Config file {path} is not valid JSON: {exc.msg}") from None
    except OSError as exc:
        raise ValidationError(f"Cannot read config file {path}: {exc.strerror}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"Config file {path} must hold a JSON object.")
    unknown = sorted(set(data) - set(DEFAULT_RUN_SPEC))
    if unknown:
        raise ValidationError(f"Unknown config keys in {path}: {', '.join(unknown)}")
    return data


def resolve_spec(config_path: Optional[str] = None,
                 flags: Optional[Mapping[str, object]] = None) -> RunSpec:
    """Defaults < config file < explicit flags (``None`` flags are unset)."""
    merged = dict(DEFAULT_RUN_SPEC)
    if config_path:
        merged.update(load_config_file(config_path))
    for key, value in (flags or {}).items():
        if key not in DEFAULT_RUN_SPEC:
            raise ValidationError(f"Unknown run parameter '{key}'.")
        if value is not None:
            merged[key] = value
    return RunSpec(**{f.name: merged[f.name] for f in fields(RunSpec)})
