"""CSV emission for trajectories and Hamiltonian scans.

Numbers are written with 12 significant digits and ``\\n`` line endings so a
re-run with the same config is byte-identical.
"""

from __future__ import annotations

import csv
import io
import sys

TRAJECTORY_COLUMNS = ("step", "queries", "alpha", "success_prob", "angle_to_sigma", "overlap_tau")
SCAN_COLUMNS = ("time", "probability")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".12g")


def trajectory_rows(traj):
    for s in traj.steps:
        yield (s.step_index, s.oracle_queries, s.alpha, s.success_prob, s.angle_to_sigma, s.overlap_tau)


def scan_rows(scan):
    return zip(scan.times.tolist(), scan.probabilities.tolist())


def write_rows(fh, header, rows, prefix=()):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([p for p, _ in prefix] + list(header))
    for row in rows:
        w.writerow([fmt(v) for _, v in prefix] + [fmt(v) for v in row])


def _open(path):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def emit_csv(traj, path) -> None:
    """One header line plus one row per trajectory step."""
    fh, close = _open(path)
    try:
        write_rows(fh, TRAJECTORY_COLUMNS, trajectory_rows(traj))
    finally:
        if close:
            fh.close()


def emit_scan_csv(scan, path) -> None:
    fh, close = _open(path)
    try:
        write_rows(fh, SCAN_COLUMNS, scan_rows(scan))
    finally:
        if close:
            fh.close()


def result_csv(result, prefix=()) -> str:
    """CSV text for a scenario result (trajectory or scan), with optional sweep columns."""
    buf = io.StringIO()
    if hasattr(result, "steps"):
        write_rows(buf, TRAJECTORY_COLUMNS, trajectory_rows(result), prefix)
    else:
        write_rows(buf, SCAN_COLUMNS, scan_rows(result), prefix)
    return buf.getvalue()
