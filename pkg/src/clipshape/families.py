"""Named input distributions used by the sweeps: ``ud``, ``mb<H>``, ``ppc<H>``, ``ppc60<H>``.

``mb4.3`` is 64QAM with the Maxwell-Boltzmann pmf of entropy 4.3 bits;
``ppc4.3`` is the Blahut-Arimoto pmf on the 64QAM grid whose entropy is 4.3
bits; ``ppc60`` does the same on 60QAM scaled to the 64QAM peak. A bare
``mb``/``ppc`` takes the default entropy.
"""
from __future__ import annotations

import math
import re

from .constellation import Constellation, fit_mb_to_entropy, make_60qam, make_square_qam, mb_pmf
from .shaping import fit_ppc_to_entropy

DEFAULT_ENTROPY = 4.3

_NAME = re.compile(r"^(ud|mb|ppc60|ppc)([0-9]*\.?[0-9]+)?$")


def support(name: str) -> Constellation:
    """Uniform constellation underlying a family name."""
    kind = parse(name)[0]
    return make_60qam(math.sqrt(98.0)) if kind == "ppc60" else make_square_qam(64)


def parse(name: str, entropy: float | None = None) -> tuple[str, float | None]:
    m = _NAME.match(name.strip().lower())
    if not m:
        raise ValueError(f"unknown pmf family {name!r}; expected ud, mb<H>, ppc<H> or ppc60<H>")
    kind, h = m.group(1), m.group(2)
    if kind == "ud":
        if h is not None:
            raise ValueError(f"'ud' takes no entropy suffix, got {name!r}")
        return kind, None
    if h is not None:
        return kind, float(h)
    return kind, DEFAULT_ENTROPY if entropy is None else float(entropy)


def build(name: str, entropy: float | None = None) -> Constellation:
    kind, h = parse(name, entropy)
    base = support(name)
    if kind == "ud":
        return base
    if kind == "mb":
        return mb_pmf(base, fit_mb_to_entropy(base, h))
    return fit_ppc_to_entropy(base, h)[0]


def label(name: str, entropy: float | None = None) -> str:
    kind, h = parse(name, entropy)
    return kind if h is None else f"{kind}{h:g}"
