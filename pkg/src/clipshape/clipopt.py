"""Clipping-ratio optimizers (back-to-back SNR vs end-to-end budget) and PAPR region analysis."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .constellation import Constellation
from .errors import NoBudgetError
from .infometrics import MetricConfig
from .linkmodel import LinkScenario, budget_curve
from .waveform import WaveformSpec, clip, digital_snr_of, generate, papr

DEFAULT_K_GRID = tuple(np.round(np.arange(1.0, 5.0 + 1e-9, 0.1), 10))


@dataclass(frozen=True)
class OptResult:
    k_star: float
    objective_at_star: float
    curve: tuple[tuple[float, float], ...]

    def summary(self, config: Optional[dict] = None) -> dict:
        out = {"k_star": self.k_star, "objective": self.objective_at_star}
        if config is not None:
            blob = json.dumps(config, sort_keys=True, default=str).encode()
            out["config_hash"] = hashlib.sha256(blob).hexdigest()[:16]
        return out


def _check_grid(k_grid: Iterable[float]) -> list[float]:
    ks = [float(k) for k in k_grid]
    if not ks:
        raise ValueError("empty k grid")
    if len(ks) < 5:
        raise ValueError("k grid needs at least 5 points")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("k grid must be strictly increasing")
    return ks


def _argmax(ks: Sequence[float], obj: Sequence[float]) -> OptResult:
    vals = np.asarray(obj, dtype=float)
    # first maximum in ascending k = smallest-k tie-break
    i = int(np.nanargmax(vals))
    return OptResult(ks[i], float(vals[i]), tuple(zip(ks, map(float, vals))))


def optimize_b2b(c: Constellation, spec: WaveformSpec, k_grid: Iterable[float] = DEFAULT_K_GRID) -> OptResult:
    """Maximize the measured DAC SNR over the clipping ratio."""
    ks = _check_grid(k_grid)
    w = generate(c, spec)
    return _argmax(ks, [digital_snr_of(w, k, spec.dac_bits) for k in ks])


def optimize_e2e(c: Constellation, spec: WaveformSpec, scenario: LinkScenario,
                 k_grid: Iterable[float] = DEFAULT_K_GRID, cfg: MetricConfig = MetricConfig(),
                 workers: Optional[int] = None) -> OptResult:
    """Maximize the link budget over the clipping ratio.

    Infeasible grid points appear in the curve as NaN.
    """
    ks = _check_grid(k_grid)
    pts = budget_curve(c, spec, scenario, ks, cfg, workers)
    budgets = [p.budget_db for p in pts]
    if all(math.isnan(b) for b in budgets):
        raise NoBudgetError("no clipping ratio on the grid meets the FEC threshold")
    return _argmax(ks, budgets)


@dataclass(frozen=True)
class RegionRow:
    k: float
    lower_db: float
    upper_db: float
    members: dict[str, float]

    def inside(self, name: str, margin: float = 0.0) -> bool:
        v = self.members[name]
        return self.lower_db + margin < v < self.upper_db - margin


def feasible_region(family: Mapping[str, Constellation], k_grid: Iterable[float], spec: WaveformSpec,
                    upper: str = "mb", lower: str = "ppc") -> list[RegionRow]:
    """PAPR of every family member versus k, bounded by the `upper` and `lower` members."""
    if upper not in family or lower not in family:
        raise ValueError(f"family must contain the bounding members {upper!r} and {lower!r}")
    waves = {name: generate(c, spec) for name, c in family.items()}
    rows = []
    for k in (float(k) for k in k_grid):
        vals = {name: papr(clip(w, k)) for name, w in waves.items()}
        rows.append(RegionRow(k, vals[lower], vals[upper], vals))
    return rows


def result_to_json(res: OptResult, config: Optional[dict] = None) -> str:
    return json.dumps({**res.summary(config), "curve": [list(p) for p in res.curve]}, indent=2)


__all__ = [
    "DEFAULT_K_GRID",
    "OptResult",
    "RegionRow",
    "feasible_region",
    "optimize_b2b",
    "optimize_e2e",
    "result_to_json",
]
