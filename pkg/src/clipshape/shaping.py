"""Blahut-Arimoto input optimization over a fixed, peak-limited support."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .constellation import Constellation, average_power, entropy, peak_power
from .errors import DomainError
from .infometrics import (
    DEFAULT_QUADRATURE_ORDER,
    MetricConfig,
    channel_table,
    divergences,
    mutual_information,
)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class ShapingResult:
    pmf: tuple[float, ...]
    iterations: int
    mi_bits: float
    true_snr_db: float
    noise_var: float
    converged: bool
    mi_trace: tuple[float, ...] = field(repr=False, default=())

    def constellation(self, support: Constellation) -> Constellation:
        return support.with_pmf(self.pmf)

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "ShapingResult":
        d = json.loads(text)
        d["pmf"] = tuple(d["pmf"])
        d["mi_trace"] = tuple(d.get("mi_trace", ()))
        return cls(**d)


def true_snr(c: Constellation, noise_var: float) -> float:
    """SNR in dB measured with the actual average power of the pmf."""
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    return 10.0 * math.log10(average_power(c) / noise_var)


def blahut_arimoto(c: Constellation, noise_var: float, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER,
                   order: int = DEFAULT_QUADRATURE_ORDER) -> ShapingResult:
    """Maximize I(X;Y) over the pmf on the fixed points of `c`.

    Starts from the uniform pmf. The points never move, so the peak power of
    the support is an implicit constraint; the average power is free. Stops
    when the relative MI change drops below `tol`; hitting `max_iter` sets
    ``converged=False`` instead of raising.
    """
    ratio, w = channel_table(c.points, noise_var, order)
    p = np.full(len(c), 1.0 / len(c))
    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        d = divergences(ratio, w, p)
        mi = float(p @ d)
        trace.append(mi)
        if it > 1 and abs(mi - trace[-2]) <= tol * abs(mi):
            converged = True
            break
        alive = p > 0
        g = np.zeros_like(p)
        g[alive] = p[alive] * np.exp2(d[alive] - d[alive].max())
        p = g / g.sum()
    else:
        # the final update has not been scored yet
        trace.append(float(p @ divergences(ratio, w, p)))
    pmf = c.with_pmf(p)
    return ShapingResult(
        pmf=tuple(float(v) for v in pmf.pmf),
        iterations=it,
        mi_bits=trace[-1],
        true_snr_db=true_snr(pmf, noise_var),
        noise_var=float(noise_var),
        converged=converged,
        mi_trace=tuple(trace),
    )


@dataclass(frozen=True)
class AirPoint:
    noise_var: float
    true_snr_db: float
    mi_bits: float
    avg_power: float
    peak_power: float


def air_point(c: Constellation, noise_var: float, optimize: bool = True,
              cfg: MetricConfig = MetricConfig()) -> AirPoint:
    """One point of an information-rate-versus-SNR curve.

    With ``optimize=True`` the pmf is first re-optimized by Blahut-Arimoto at
    `noise_var` and the SNR uses the resulting average power.
    """
    if optimize:
        res = blahut_arimoto(c, noise_var, order=cfg.quadrature_order)
        shaped = res.constellation(c)
        mi = res.mi_bits
    else:
        shaped = c
        mi = mutual_information(c, noise_var, cfg)
    return AirPoint(float(noise_var), true_snr(shaped, noise_var), mi,
                    average_power(shaped), peak_power(shaped))


def air_curve(c: Constellation, noise_grid: Iterable[float], optimize: bool = True,
              cfg: MetricConfig = MetricConfig(), workers: Optional[int] = None) -> list[AirPoint]:
    grid = [float(s) for s in noise_grid]
    if any(s <= 0 for s in grid):
        raise ValueError("noise grid must be strictly positive")
    run = lambda s: air_point(c, s, optimize, cfg)  # noqa: E731
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(run, grid))
    return [run(s) for s in grid]


def interpolate_air(points: Sequence[AirPoint], snr_db: Sequence[float]) -> np.ndarray:
    """MI of a curve read off at the requested true SNR values (linear interpolation)."""
    snr = np.array([a.true_snr_db for a in points])
    mi = np.array([a.mi_bits for a in points])
    order = np.argsort(snr)
    return np.interp(np.asarray(snr_db, dtype=float), snr[order], mi[order])


_ppc_cache: dict[tuple, tuple[Constellation, float]] = {}


def fit_ppc_to_entropy(c: Constellation, target_h: float, tol_bits: float = 1e-4) -> tuple[Constellation, float]:
    """Blahut-Arimoto pmf on the support of `c` whose entropy equals `target_h`.

    The BA pmf loses entropy as the noise grows, so the noise variance is found
    by root bracketing in log scale. Returns ``(constellation, noise_var)``.
    A target of ``log2(len(c))`` is the noiseless limit: the uniform pmf with
    noise variance 0.
    """
    key = (c.points.tobytes(), float(target_h), tol_bits)
    if key in _ppc_cache:
        return _ppc_cache[key]
    h_max = math.log2(len(c))
    if not 0 < target_h <= h_max + 1e-12:
        raise DomainError(f"target entropy {target_h} outside (0, {h_max}]")
    if target_h >= h_max - 1e-12:
        out = (c.with_pmf(np.ones(len(c))), 0.0)
        _ppc_cache[key] = out
        return out

    pk = float(c.energies.max())

    def gap(log_s2: float) -> float:
        res = blahut_arimoto(c, 10.0**log_s2)
        return entropy(res.constellation(c)) - target_h

    lo, hi = math.log10(pk) - 5.0, math.log10(pk) + 1.0
    if gap(lo) < 0 or gap(hi) > 0:
        raise DomainError(f"target entropy {target_h} not bracketed by the BA family")
    log_s2 = brentq(gap, lo, hi, xtol=1e-9)
    s2 = 10.0**log_s2
    shaped = blahut_arimoto(c, s2).constellation(c)
    if abs(entropy(shaped) - target_h) > tol_bits:
        raise RuntimeError(f"BA entropy fit missed target by {entropy(shaped) - target_h:.2e} bits")
    _ppc_cache[key] = (shaped, s2)
    return shaped, s2
