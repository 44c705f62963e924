"""QAM constellations, probability mass functions and Maxwell-Boltzmann shaping."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from .errors import DomainError

# relative tolerance used when grouping points into energy rings
_RING_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Constellation:
    """Complex point set with a probability mass function and optional bit labels.

    Arrays are copied and made read-only on construction, so instances can be
    shared freely.
    """

    points: NDArray[np.complex128]
    pmf: NDArray[np.float64]
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.complex128).ravel()
        p = np.array(self.pmf, dtype=np.float64).ravel()
        if pts.size == 0:
            raise ValueError("constellation needs at least one point")
        if p.shape != pts.shape:
            raise ValueError(f"pmf has {p.size} entries for {pts.size} points")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("pmf must be non-negative and sum to 1")
        if np.unique(np.round(pts, 12)).size != pts.size:
            raise ValueError("points must be pairwise distinct")
        labels = self.labels
        if labels is not None:
            labels = tuple(str(b) for b in labels)
            if len(labels) != pts.size:
                raise ValueError("one label per point required")
            width = max(1, math.ceil(math.log2(pts.size)))
            if any(len(b) != width or set(b) - {"0", "1"} for b in labels):
                raise ValueError(f"labels must be bit strings of length {width}")
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be pairwise distinct")
        pts.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "pmf", p)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.points.size

    @property
    def energies(self) -> NDArray[np.float64]:
        return np.abs(self.points) ** 2

    @property
    def bits_per_label(self) -> int:
        return max(1, math.ceil(math.log2(len(self))))

    def label_bits(self) -> NDArray[np.int8]:
        """Labels as an integer array of shape (points, bits)."""
        if self.labels is None:
            raise ValueError("constellation has no bit labels")
        return np.array([[int(ch) for ch in b] for b in self.labels], dtype=np.int8)

    def with_pmf(self, pmf: Sequence[float]) -> "Constellation":
        p = np.asarray(pmf, dtype=np.float64)
        return Constellation(self.points, p / p.sum(), self.labels)

    def key(self) -> bytes:
        """Hashable fingerprint of points and pmf, used for caching."""
        return self.points.tobytes() + self.pmf.tobytes()

    def to_dict(self) -> dict:
        out = {
            "points": [[float(z.real), float(z.imag)] for z in self.points],
            "pmf": [float(v) for v in self.pmf],
        }
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Constellation":
        pts = np.array([complex(re, im) for re, im in data["points"]])
        return cls(pts, np.asarray(data["pmf"], dtype=float), data.get("labels"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Constellation":
        return cls.from_dict(json.loads(text))


def gray_code(nbits: int) -> NDArray[np.int64]:
    """Binary-reflected Gray code words for levels ``0 .. 2**nbits - 1``."""
    idx = np.arange(2**nbits)
    return idx ^ (idx >> 1)


def make_square_qam(order: int) -> Constellation:
    """Square QAM on the odd-integer grid with Gray labels per rail.

    The first half of each label addresses the in-phase level, the second half
    the quadrature level.
    """
    if order not in (4, 16, 64):
        raise ValueError(f"unsupported QAM order {order}; expected 4, 16 or 64")
    side = int(round(math.sqrt(order)))
    rail_bits = int(math.log2(side))
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    codes = gray_code(rail_bits)
    points, labels = [], []
    for i, re in enumerate(levels):
        for q, im in enumerate(levels):
            points.append(complex(re, im))
            labels.append(format(codes[i], f"0{rail_bits}b") + format(codes[q], f"0{rail_bits}b"))
    return Constellation(np.array(points), np.full(order, 1.0 / order), tuple(labels))


def make_60qam(peak_match: float = math.sqrt(98.0)) -> Constellation:
    """64QAM with its four corners removed, scaled so the largest amplitude is `peak_match`.

    Surviving points keep their 64QAM labels.
    """
    if not peak_match > 0:
        raise ValueError("peak_match must be positive")
    qam = make_square_qam(64)
    keep = qam.energies < qam.energies.max() - 1e-9
    pts = qam.points[keep]
    pts = pts * (peak_match / np.abs(pts).max())
    labels = tuple(b for b, k in zip(qam.labels, keep) if k)
    return Constellation(pts, np.full(pts.size, 1.0 / pts.size), labels)


def entropy(c: Constellation) -> float:
    """Entropy of the pmf in bits, with 0 log 0 = 0."""
    p = c.pmf[c.pmf > 0]
    return float(-np.sum(p * np.log2(p)))


def average_power(c: Constellation) -> float:
    return float(np.dot(c.pmf, c.energies))


def peak_power(c: Constellation) -> float:
    """Largest energy among points carrying non-zero probability."""
    return float(c.energies[c.pmf > 0].max())


def mb_pmf(c: Constellation, nu: float) -> Constellation:
    """Maxwell-Boltzmann pmf ``p_i ~ exp(-nu |x_i|^2)`` on the points of `c`."""
    if nu < 0:
        raise ValueError("nu must be non-negative")
    e = c.energies
    # shift by the minimum energy so large nu does not underflow
    w = np.exp(-nu * (e - e.min()))
    return c.with_pmf(w / w.sum())


def _ring_multiplicities(c: Constellation) -> NDArray[np.int64]:
    e = np.sort(c.energies)
    breaks = np.flatnonzero(np.diff(e) > _RING_RTOL * max(e[-1], 1.0)) + 1
    return np.diff(np.r_[0, breaks, e.size])


def fit_mb_to_entropy(c: Constellation, target_h: float) -> float:
    """Return the Maxwell-Boltzmann exponent whose pmf has entropy `target_h` bits.

    Raises
    ------
    DomainError
        If `target_h` lies outside ``(log2(innermost ring size), log2(len(c))]``.
    """
    h_max = math.log2(len(c))
    h_min = math.log2(_ring_multiplicities(c)[0])
    if not h_min < target_h <= h_max + 1e-12:
        raise DomainError(
            f"entropy {target_h} bits not reachable; must lie in ({h_min:.4f}, {h_max:.4f}]"
        )
    if target_h >= h_max - 1e-12:
        return 0.0

    def gap(nu: float) -> float:
        return entropy(mb_pmf(c, nu)) - target_h

    # bracket [0, 10], widened for constellations with small energy spacing
    hi = 10.0
    while gap(hi) > 0:
        hi *= 2.0
    nu = brentq(gap, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(gap(nu)) > 1e-9:
        raise RuntimeError(f"entropy bisection did not converge (residual {gap(nu):.3e})")
    return float(nu)
