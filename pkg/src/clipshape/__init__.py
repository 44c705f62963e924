"""Clipping-aware probabilistic shaping for DAC-limited coherent transmitters.

Shaped 64QAM inputs (Maxwell-Boltzmann and peak-power-constrained
Blahut-Arimoto pmfs), their information rates over AWGN, the clipped and
quantized RRC waveform at the DAC, and a link-budget model tying clipping to
transmit power.
"""
__version__ = "0.1.0"

from .constellation import (  # noqa: E402
    Constellation,
    average_power,
    entropy,
    fit_mb_to_entropy,
    make_60qam,
    make_square_qam,
    mb_pmf,
    peak_power,
)
from .errors import DomainError, NoBudgetError  # noqa: E402
from .infometrics import MetricConfig, awgn_capacity, gmi, mutual_information, ngmi  # noqa: E402
from .shaping import ShapingResult, air_curve, blahut_arimoto, fit_ppc_to_entropy  # noqa: E402
from .waveform import (  # noqa: E402
    WaveformSpec,
    clip,
    digital_snr_analytic,
    digital_snr_empirical,
    generate,
    papr,
    quantize,
)
from .linkmodel import LinkScenario, budget_curve, link_budget, tx_power  # noqa: E402
from .clipopt import OptResult, feasible_region, optimize_b2b, optimize_e2e  # noqa: E402

__all__ = [
    "__version__",
    "Constellation", "average_power", "entropy", "fit_mb_to_entropy", "make_60qam",
    "make_square_qam", "mb_pmf", "peak_power",
    "DomainError", "NoBudgetError",
    "MetricConfig", "awgn_capacity", "gmi", "mutual_information", "ngmi",
    "ShapingResult", "air_curve", "blahut_arimoto", "fit_ppc_to_entropy",
    "WaveformSpec", "clip", "digital_snr_analytic", "digital_snr_empirical", "generate", "papr", "quantize",
    "LinkScenario", "budget_curve", "link_budget", "tx_power",
    "OptResult", "feasible_region", "optimize_b2b", "optimize_e2e",
]
