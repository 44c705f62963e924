"""Unamplified link model: clipping-dependent Tx power, loss sweep and link budget."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import brentq

from .constellation import Constellation, entropy
from .errors import NoBudgetError
from .infometrics import MetricConfig, gmi, ngmi, noise_var_for_snr
from .waveform import WaveformSpec, clip, digital_snr_of, generate

# Tx power anchor: PPC-BA 64QAM (4.3 bits) clipped at k = 2.1 reads -9.2 dBm
# with the default WaveformSpec; see calibrate_peak_power.
DEFAULT_PEAK_POWER_DBM = -2.753
DEFAULT_NOISE_FLOOR_DBM = -39.0
DEFAULT_FEC_THRESHOLD = 5.0 / 6.0


@dataclass(frozen=True)
class LinkScenario:
    peak_power_dbm: float = DEFAULT_PEAK_POWER_DBM
    noise_floor_dbm: float = DEFAULT_NOISE_FLOOR_DBM
    fec_threshold: float = DEFAULT_FEC_THRESHOLD
    loss_min_db: float = 0.0
    loss_max_db: float = 40.0
    m_bits: int = 6

    def __post_init__(self):
        if not self.loss_min_db < self.loss_max_db:
            raise ValueError("loss_min_db must be below loss_max_db")
        if not 0 < self.fec_threshold < 1:
            raise ValueError("fec_threshold must lie in (0, 1)")
        if self.m_bits < 1:
            raise ValueError("m_bits must be positive")

    def with_(self, **changes) -> "LinkScenario":
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict) -> "LinkScenario":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown scenario key {unknown[0]!r}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "LinkScenario":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text) if text.strip() else {})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BudgetCurvePoint:
    k: float
    tx_power_dbm: float
    budget_db: float
    ngmi_at_budget: float


def tx_power_ratio_db(k: float, c: Constellation, spec: WaveformSpec) -> float:
    """Clipped waveform power relative to both rails at full swing, in dB (<= 0)."""
    w = clip(generate(c, spec), k)
    power = float(np.mean(np.abs(w.samples) ** 2))
    return 10 * math.log10(power / (2 * w.clip_level**2))


def tx_power(k: float, c: Constellation, spec: WaveformSpec, scenario: LinkScenario) -> float:
    """Modulator output power in dBm for clipping ratio `k`.

    The full-swing (both rails at +-c) power is pinned at
    ``scenario.peak_power_dbm``; lighter clipping leaves more headroom and
    therefore less average power.
    """
    return scenario.peak_power_dbm + tx_power_ratio_db(k, c, spec)


def calibrate_peak_power(c: Constellation, spec: WaveformSpec, k: float, target_dbm: float) -> float:
    """Peak power anchor that makes `c` clipped at `k` read `target_dbm`."""
    return target_dbm - tx_power_ratio_db(k, c, spec)


def _combine_db(*snrs_db: float) -> float:
    inv = sum(10.0 ** (-s / 10.0) for s in snrs_db)
    return -10 * math.log10(inv) if inv > 0 else math.inf


def effective_rx_snr(k: float, loss_db: float, c: Constellation, spec: WaveformSpec,
                     scenario: LinkScenario) -> float:
    """Receiver SNR in dB after the DAC impairment and the receiver noise floor.

    Clipping plus quantization noise rides along at the digital SNR; the
    receiver noise floor is fixed in dBm. The two add in linear noise power.
    """
    w = generate(c, spec)
    snr_tx = digital_snr_of(w, k, spec.dac_bits)
    snr_rx = tx_power(k, c, spec, scenario) - loss_db - scenario.noise_floor_dbm
    return _combine_db(snr_tx, snr_rx)


def ngmi_at_snr(c: Constellation, snr_db: float, m: int, cfg: MetricConfig = MetricConfig()) -> float:
    """NGMI of `c` on an AWGN channel at true SNR `snr_db`."""
    if snr_db == math.inf:
        return 1.0
    h = entropy(c)
    g = gmi(c, noise_var_for_snr(c, snr_db), cfg)
    # rates below zero carry no information; quadrature can overshoot H by ~1e-12
    return ngmi(min(max(g, 0.0), h), h, m)


def ngmi_vs_loss(k: float, c: Constellation, spec: WaveformSpec, scenario: LinkScenario,
                 loss_grid: Iterable[float], cfg: MetricConfig = MetricConfig()) -> list[tuple[float, float]]:
    """Rows ``(loss_db, ngmi)`` for a fixed clipping ratio."""
    return [
        (float(loss), ngmi_at_snr(c, effective_rx_snr(k, loss, c, spec, scenario), scenario.m_bits, cfg))
        for loss in loss_grid
    ]


def _budget(k, c, spec, scenario, cfg) -> tuple[float, float]:
    def excess(loss: float) -> float:
        snr = effective_rx_snr(k, loss, c, spec, scenario)
        return ngmi_at_snr(c, snr, scenario.m_bits, cfg) - scenario.fec_threshold

    lo, hi = scenario.loss_min_db, scenario.loss_max_db
    if excess(lo) <= 0:
        raise NoBudgetError(f"NGMI below {scenario.fec_threshold:.4f} already at {lo} dB loss (k={k})")
    if excess(hi) > 0:
        raise ValueError(f"NGMI still above threshold at {hi} dB loss; widen the loss range")
    loss = brentq(excess, lo, hi, xtol=1e-7)
    resid = excess(loss)
    if abs(resid) > 1e-4:
        raise RuntimeError(f"budget search residual {resid:.2e} exceeds 1e-4")
    return float(loss), resid + scenario.fec_threshold


def link_budget(k: float, c: Constellation, spec: WaveformSpec, scenario: LinkScenario,
                cfg: MetricConfig = MetricConfig()) -> float:
    """Largest loss in dB at which NGMI still meets the FEC threshold.

    Raises
    ------
    NoBudgetError
        If the threshold is missed even at ``scenario.loss_min_db``.
    """
    return _budget(k, c, spec, scenario, cfg)[0]


def budget_point(k: float, c: Constellation, spec: WaveformSpec, scenario: LinkScenario,
                 cfg: MetricConfig = MetricConfig()) -> BudgetCurvePoint:
    """Budget at one k; infeasible points carry NaN budget."""
    p_tx = tx_power(k, c, spec, scenario)
    try:
        loss, at = _budget(k, c, spec, scenario, cfg)
    except NoBudgetError:
        loss, at = math.nan, math.nan
    return BudgetCurvePoint(float(k), p_tx, loss, at)


def budget_curve(c: Constellation, spec: WaveformSpec, scenario: LinkScenario, k_grid: Iterable[float],
                 cfg: MetricConfig = MetricConfig(), workers: Optional[int] = None) -> list[BudgetCurvePoint]:
    ks = [float(k) for k in k_grid]
    generate(c, spec)  # warm the waveform cache before fanning out
    run = lambda k: budget_point(k, c, spec, scenario, cfg)  # noqa: E731
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(run, ks))
    return [run(k) for k in ks]
