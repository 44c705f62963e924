"""Mutual information, GMI and NGMI of discrete inputs over the complex AWGN channel.

Noise convention used throughout the package: ``noise_var`` is the variance of
the circular complex Gaussian noise, i.e. ``noise_var / 2`` per rail, and
SNR = E|X|^2 / noise_var.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

from .constellation import Constellation, entropy
from .errors import DomainError

DEFAULT_QUADRATURE_ORDER = 20


@dataclass(frozen=True)
class MetricConfig:
    method: str = "quadrature"
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER
    mc_symbols: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("quadrature", "monte_carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.quadrature_order < 8:
            raise ValueError("quadrature_order must be at least 8")
        if self.method == "monte_carlo" and self.mc_symbols < 10_000:
            raise ValueError("mc_symbols must be at least 1e4 for Monte Carlo")


@lru_cache(maxsize=8)
def _gh_nodes(order: int) -> tuple[NDArray[np.complex128], NDArray[np.float64]]:
    """Unit-variance complex Gauss-Hermite nodes and weights (weights sum to 1)."""
    t, w = np.polynomial.hermite.hermgauss(order)
    # z = t_r + j t_i has E|z|^2 = 1 under the weight exp(-|z|^2) / pi
    nodes = (t[:, None] + 1j * t[None, :]).ravel()
    weights = (w[:, None] * w[None, :]).ravel() / math.pi
    return nodes, weights


def channel_table(points: NDArray[np.complex128], noise_var: float,
                  order: int = DEFAULT_QUADRATURE_ORDER) -> tuple[NDArray, NDArray]:
    """Likelihood ratios on the quadrature grid.

    Returns ``(ratio, weights)`` with
    ``ratio[i, n, j] = p(y_in | x_j) / p(y_in | x_i)`` for ``y_in = x_i + z_n``.
    Expectations over ``y | x_i`` become ``ratio``-valued sums against ``weights``.
    """
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    z, w = _gh_nodes(order)
    z = z * math.sqrt(noise_var)
    y = points[:, None] + z[None, :]
    d2 = np.abs(y[:, :, None] - points[None, None, :]) ** 2
    ratio = np.exp(-(d2 - (np.abs(z) ** 2)[None, :, None]) / noise_var)
    return ratio, w


def divergences(ratio: NDArray, weights: NDArray, pmf: NDArray) -> NDArray[np.float64]:
    """Per-point ``D_i = E_{y|x_i}[log2 p(y|x_i) / q(y)]`` in bits."""
    q = ratio @ pmf
    return -np.log2(q) @ weights


def awgn_capacity(snr_db: float) -> float:
    """Shannon capacity ``log2(1 + SNR)`` in bits per complex symbol."""
    return float(np.log2(1.0 + 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)))


def _support(c: Constellation) -> tuple[NDArray, NDArray, NDArray]:
    keep = c.pmf > 0
    return keep, c.points[keep], c.pmf[keep]


def _mi_quadrature(c: Constellation, noise_var: float, order: int) -> float:
    _, pts, p = _support(c)
    ratio, w = channel_table(pts, noise_var, order)
    return float(p @ divergences(ratio, w, p))


def _sample(c: Constellation, noise_var: float, n: int, seed: int):
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(c), size=n, p=c.pmf)
    z = math.sqrt(noise_var / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return idx, c.points[idx] + z, z


def monte_carlo_mi(c: Constellation, noise_var: float, n: int = 1_000_000,
                   seed: int = 0, chunk: int = 100_000) -> tuple[float, float]:
    """Monte Carlo estimate of I(X;Y) in bits and its standard error."""
    idx, y, z = _sample(c, noise_var, n, seed)
    terms = np.empty(n)
    for s in range(0, n, chunk):
        ys, zs = y[s:s + chunk], z[s:s + chunk]
        d2 = np.abs(ys[:, None] - c.points[None, :]) ** 2
        q = np.exp(-(d2 - (np.abs(zs) ** 2)[:, None]) / noise_var) @ c.pmf
        terms[s:s + chunk] = -np.log2(q)
    return float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(n))


def mutual_information(c: Constellation, noise_var: float, cfg: MetricConfig = MetricConfig()) -> float:
    """I(X;Y) in bits per symbol for the pmf of `c` at complex noise variance `noise_var`."""
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    if cfg.method == "monte_carlo":
        return monte_carlo_mi(c, noise_var, cfg.mc_symbols, cfg.seed)[0]
    return _mi_quadrature(c, noise_var, cfg.quadrature_order)


def _bitwise_penalty(ratio_p: NDArray, bits: NDArray, own_bits: NDArray) -> NDArray:
    """Sum over bit levels of ``log2(q / q_b)`` for every (i, n) quadrature sample.

    `ratio_p` is the likelihood-ratio tensor already weighted by the pmf,
    shape (i, n, j); `own_bits` are the labels of the transmitted points (i, b).
    """
    q = ratio_p.sum(axis=-1)
    total = np.zeros_like(q)
    for b in range(bits.shape[1]):
        one = bits[:, b].astype(float)
        # both partitions summed directly: q - ones cancels when the own point is rare
        match = np.where(own_bits[:, b, None] == 1, ratio_p @ one, ratio_p @ (1.0 - one))
        total += np.log2(q / match)
    return total


def gmi(c: Constellation, noise_var: float, cfg: MetricConfig = MetricConfig()) -> float:
    """Bit-metric decoding rate ``H(X) - sum_b E[log2 q(y) / q_b(y)]`` in bits per symbol.

    Needs bit labels on `c`. Probabilistically shaped inputs can produce a
    negative value at very low SNR; it is returned as computed.
    """
    if c.labels is None:
        raise ValueError("GMI needs a labelled constellation")
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    bits = c.label_bits()
    if cfg.method == "monte_carlo":
        return monte_carlo_gmi(c, noise_var, cfg.mc_symbols, cfg.seed)[0]
    keep, pts, p = _support(c)
    bits = bits[keep]
    ratio, w = channel_table(pts, noise_var, cfg.quadrature_order)
    penalty = _bitwise_penalty(ratio * p, bits, bits) @ w
    return float(entropy(c) - p @ penalty)


def monte_carlo_gmi(c: Constellation, noise_var: float, n: int = 1_000_000,
                    seed: int = 0, chunk: int = 50_000) -> tuple[float, float]:
    """Monte Carlo GMI estimate in bits and its standard error."""
    bits = c.label_bits()
    idx, y, z = _sample(c, noise_var, n, seed)
    terms = np.empty(n)
    for s in range(0, n, chunk):
        ys, zs = y[s:s + chunk], z[s:s + chunk]
        d2 = np.abs(ys[:, None] - c.points[None, :]) ** 2
        f = np.exp(-(d2 - (np.abs(zs) ** 2)[:, None]) / noise_var) * c.pmf
        terms[s:s + chunk] = _bitwise_penalty(f[:, None, :], bits, bits[idx[s:s + chunk]])[:, 0]
    return float(entropy(c) - terms.mean()), float(terms.std(ddof=1) / math.sqrt(n))


def ngmi(gmi_bits: float, entropy_bits: float, m: int) -> float:
    """Normalized GMI, ``1 - (H - GMI) / m``.

    Raises
    ------
    DomainError
        Unless ``0 <= gmi_bits <= entropy_bits <= m`` (1e-9 slack for quadrature error).
    """
    eps = 1e-9
    if not (-eps <= gmi_bits <= entropy_bits + eps and entropy_bits <= m + eps):
        raise DomainError(
            f"need 0 <= gmi ({gmi_bits}) <= entropy ({entropy_bits}) <= m ({m})"
        )
    return 1.0 - (entropy_bits - gmi_bits) / m


def noise_var_for_snr(c: Constellation, snr_db: float) -> float:
    """Complex noise variance that puts `c` at true SNR `snr_db`."""
    return float(np.dot(c.pmf, c.energies)) / 10.0 ** (snr_db / 10.0)


def metric_sweep(c: Constellation, snr_db_grid: Iterable[float], m: int | None = None,
                 cfg: MetricConfig = MetricConfig()) -> list[tuple[float, float, float, float]]:
    """Rows ``(snr_db, mi, gmi, ngmi)`` over a grid of true SNR values."""
    m = c.bits_per_label if m is None else m
    h = entropy(c)
    rows = []
    for snr in snr_db_grid:
        s2 = noise_var_for_snr(c, snr)
        g = gmi(c, s2, cfg)
        rows.append((float(snr), mutual_information(c, s2, cfg), g,
                     ngmi(min(max(g, 0.0), h), h, m)))
    return rows
