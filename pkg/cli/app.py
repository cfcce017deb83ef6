"""
RQC — Command-line front end.

    rqc run     [--mode exact|tomography] [--scenario stage2|stage5] [--qwp in|out] ...
    rqc verify  [--steps N]

Exit codes: 0 success, 1 invalid input, 2 failed verification.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, TextIO

from cli.config import RunSpec, resolve_spec
from cli.export import format_verification, write_rows, write_rows_to_path
from simulator.engine import evaluate_point
from simulator.errors import SimulatorError
from simulator.verify import corrupt_gate, run_verification

logger = logging.getLogger(__name__)

PROG = "rqc"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2

# run flags; dests match RunSpec fields
_RUN_FLAGS = (
    "mode", "scenario", "qwp", "theta_start", "theta_stop", "steps", "atoms", "shots",
    "reps", "readout_p", "mitigate", "seed", "out", "format", "workers",
)


class UsageError(SimulatorError):
    """Command-line arguments that argparse rejects."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Reality quantum correlator simulator.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for per-step detail (stderr)")
    sub = parser.add_subparsers(dest="command", metavar="{run,verify}")
    sub.required = True

    run = sub.add_parser("run", help="sweep theta and write irreality rows")
    run.add_argument("--config", metavar="FILE", help="flat JSON run configuration")
    run.add_argument("--mode", choices=("exact", "tomography"))
    run.add_argument("--scenario", choices=("stage2", "stage5"))
    run.add_argument("--qwp", choices=("in", "out"))
    run.add_argument("--theta-start", type=float, help="radians")
    run.add_argument("--theta-stop", type=float, help="radians")
    run.add_argument("--steps", type=int)
    run.add_argument("--atoms", type=int, choices=(1, 2))
    run.add_argument("--shots", type=int, help="shots per tomography setting")
    run.add_argument("--reps", type=int, help="tomography repetitions")
    run.add_argument("--readout-p", type=float, help="per-qubit readout flip probability")
    run.add_argument("--mitigate", action="store_true", default=None,
                     help="invert the readout confusion before reconstruction")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--workers", type=int, help="theta points evaluated concurrently")

    verify = sub.add_parser("verify", help="check the circuit against the closed forms")
    verify.add_argument("--steps", type=int, default=33, help="theta grid size")
    verify.add_argument("--corrupt-gate", metavar="NAME", help=argparse.SUPPRESS)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _report_error(message: str, stderr: TextIO) -> None:
    logger.error(message)
    print(f"{PROG}: error: {message}", file=stderr)


# ── Commands ─────────────────────────────────────────────────────────────

def sweep(spec: RunSpec) -> list[dict]:
    """Rows for every theta of the grid, ordered by theta then target."""
    thetas = spec.thetas()

    def evaluate(indexed) -> list[dict]:
        index, theta = indexed
        return evaluate_point(
            float(theta), mode=spec.mode, scenario=spec.scenario_key, atoms=spec.atoms,
            shots=spec.shots, repetitions=spec.reps, readout_p=spec.readout_p,
            mitigate=spec.mitigate, seed=spec.seed, stream=index,
        )

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            per_point = list(pool.map(evaluate, enumerate(thetas)))
    else:
        per_point = [evaluate(item) for item in enumerate(thetas)]
    rows = [row for point in per_point for row in point]
    logger.info("Sweep finished: %d points, %d rows (%s, %s)",
                len(thetas), len(rows), spec.mode, spec.scenario_key)
    return rows


def cmd_run(spec: RunSpec, stdout: Optional[TextIO] = None,
            stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        rows = sweep(spec)
        if spec.out:
            write_rows_to_path(rows, spec.format, spec.out, spec.to_dict())
        else:
            write_rows(rows, spec.format, stdout, spec.to_dict())
    except (SimulatorError, ValueError) as exc:
        _report_error(str(exc), stderr)
        return EXIT_INVALID
    except OSError as exc:
        _report_error(f"cannot write {spec.out}: {exc.strerror}", stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_verify(steps: int = 33, corrupt: Optional[str] = None,
               stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if steps < 1:
            raise UsageError(f"'steps' must be at least 1, got {steps}.")
        overrides = corrupt_gate(corrupt) if corrupt else None
        trail = run_verification(steps=steps, overrides=overrides)
    except (SimulatorError, ValueError) as exc:
        _report_error(str(exc), stderr)
        return EXIT_INVALID
    stdout.write(format_verification(trail))
    return EXIT_OK if trail["summary"]["failed"] == 0 else EXIT_VERIFY_FAILED


# ── Entry ────────────────────────────────────────────────────────────────

def run_cli(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
            stderr: Optional[TextIO] = None) -> int:
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=stderr)
        _report_error(str(exc), stderr)
        return EXIT_INVALID
    _configure_logging(args.verbose)

    if args.command == "verify":
        return cmd_verify(args.steps, args.corrupt_gate, stdout, stderr)

    try:
        spec = resolve_spec(args.config, {key: getattr(args, key) for key in _RUN_FLAGS})
    except (SimulatorError, ValueError) as exc:
        _report_error(str(exc), stderr)
        return EXIT_INVALID
    return cmd_run(spec, stdout, stderr)


def main() -> int:
    return run_cli(sys.argv[1:])
