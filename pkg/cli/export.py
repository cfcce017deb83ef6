"""
RQC — Export of sweep rows and the verification trail.

CSV and JSON writers for ``run`` and the plain-text pass/fail table printed
by ``verify``.  Output depends only on the rows, so identical runs give
identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Optional, TextIO

from simulator.engine import ROW_FIELDS


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def rows_to_csv(rows: Iterable[dict]) -> str:
    """CSV with the mandatory header; empty cells for unset fields."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=ROW_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _format_value(row.get(key)) for key in ROW_FIELDS})
    return buffer.getvalue()


def rows_to_json(rows: Iterable[dict], spec: Optional[dict] = None) -> str:
    payload = {
        "spec": spec or {},
        "rows": [{key: row.get(key) for key in ROW_FIELDS} for row in rows],
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def write_rows(rows: list[dict], fmt: str, stream: TextIO, spec: Optional[dict] = None) -> None:
    stream.write(rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows, spec))


def write_rows_to_path(rows: list[dict], fmt: str, path: str, spec: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_rows(rows, fmt, f, spec)


# ── Verification table ───────────────────────────────────────────────────

def format_verification(trail: dict) -> str:
    """Plain-text pass/fail table of a ``run_verification`` trail."""
    lines: list[str] = []
    lines.append("=" * 56)
    lines.append("  RQC — Verification")
    lines.append("=" * 56)
    for check in trail.get("checks", []):
        status = "PASS" if check["passed"] else "FAIL"
        lines.append(f"  [{status}] {check['name']}")
        lines.append(f"         {check['detail']}")

    summary = trail.get("summary", {})
    lines.append("\n── SUMMARY ────────────────────────────────")
    lines.append(f"  Checks: {summary.get('total', 0)}   Failed: {summary.get('failed', 0)}")
    lines.append(f"  Status: {summary.get('validation_status', 'unknown')}")
    lines.append(f"  Runtime: {summary.get('runtime_ms', 0)} ms")
    lines.append("=" * 56)
    return "\n".join(lines) + "\n"
