"""CSV and manifest files written by the command-line runs.

CSV dialect: comma separated, '.' decimal point, LF line endings, UTF-8, one
header row, and a trailing ``# manifest: <file>`` comment line naming the run
manifest. Floats are written with ``repr`` so reruns are byte-identical.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MANIFEST_NAME = "manifest.json"


def _fmt(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence],
              manifest: str = MANIFEST_NAME) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        fh.write(f"# manifest: {manifest}\n")
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    """Rows of a CSV written by `write_csv`, skipping the manifest comment."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def column(rows: list[dict[str, str]], name: str, where: dict | None = None) -> list[float]:
    sel = rows if not where else [r for r in rows if all(r[k] == v for k, v in where.items())]
    return [float(r[name]) for r in sel]


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
