"""CSV / JSON emission shared by the CLI and tests.

CSV layout: a single '#' comment line referencing the run manifest (this
line carries the only timestamp, so file bodies are byte-reproducible),
then a comma-separated header row and data rows with '.' decimals.
"""

import datetime
import json
from pathlib import Path

import numpy as np


def _fmt_value(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return repr(float(x))


def comment_line(manifest_name: str) -> str:
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return f"# manifest: {manifest_name} written: {stamp}"


def write_table_csv(path, header, rows, manifest_name="manifest.json"):
    lines = [comment_line(manifest_name), ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_value(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_table_json(path, header, rows, manifest_name="manifest.json"):
    payload = {
        "manifest": manifest_name,
        "columns": list(header),
        "rows": [[None if v is None else
                  (int(v) if isinstance(v, (int, np.integer)) else float(v))
                  for v in row] for row in rows],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True)
                          + "\n")


def write_table(path_base, header, rows, fmt="csv",
                manifest_name="manifest.json") -> Path:
    path = Path(f"{path_base}.{fmt}")
    if fmt == "csv":
        write_table_csv(path, header, rows, manifest_name)
    elif fmt == "json":
        write_table_json(path, header, rows, manifest_name)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def csv_body(path) -> str:
    """File content with '#' comment lines stripped (replay comparison)."""
    lines = Path(path).read_text().splitlines()
    return "\n".join(l for l in lines if not l.startswith("#"))


def curve_rows(curve):
    unc = curve.uncertainty
    for i in range(curve.tau.size):
        yield (curve.tau[i], curve.chi[i], curve.w[i],
               curve.half_one_minus_w[i],
               None if unc is None else unc[i])


CURVE_HEADER = ("tau_s", "chi", "w", "half_one_minus_w", "uncertainty")


def write_curve(path_base, curve, fmt="csv", manifest_name="manifest.json"):
    return write_table(path_base, CURVE_HEADER, curve_rows(curve), fmt,
                       manifest_name)


def write_trace(path_base, trace, fmt="csv", manifest_name="manifest.json"):
    rows = zip(trace.times(), trace.samples)
    return write_table(path_base, ("t_s", "beta_rad_per_s"), rows, fmt,
                       manifest_name)


def write_manifest(path, payload: dict):
    payload = dict(payload)
    payload["timestamp"] = datetime.datetime.now(
        datetime.timezone.utc).isoformat()
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True)
                          + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
