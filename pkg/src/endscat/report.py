"""Report bundles: per-suite CSV tables plus a JSON summary.

Floats are written with ``repr`` (shortest round-trip form), so identical
inputs produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__


def format_cell(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(rows):
    """CSV for a list of homogeneous dicts; column order follows the first row."""
    buf = io.StringIO()
    if not rows:
        return ""
    cols = list(rows[0])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([format_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


@dataclass
class ReportBundle:
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def passed(self):
        return self.error is None and all(self.checks.values())

    def add(self, suite, tables, summary, checks):
        for name, rows in tables.items():
            self.tables[f"{suite}_{name}" if name else suite] = rows
        self.summary[suite] = summary
        self.checks.update({f"{suite}.{k}": bool(v) for k, v in checks.items()})

    def record(self):
        return _jsonable({
            "passed": self.passed,
            "checks": self.checks,
            "summary": self.summary,
            "error": self.error,
            "provenance": self.provenance,
        })

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name in sorted(self.tables):
            p = out / f"{name}.csv"
            p.write_text(csv_text(self.tables[name]))
            written.append(p)
        p = out / "summary.json"
        p.write_text(json.dumps(self.record(), indent=2, sort_keys=True) + "\n")
        written.append(p)
        return written


def provenance(cfg_hash, wall_time):
    return {
        "config_sha256": cfg_hash,
        "version": __version__,
        "wall_time_s": round(float(wall_time), 3),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
