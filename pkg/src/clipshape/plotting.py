"""Static SVG figures rendered from the sweep CSV files.

Every figure is a function of one CSV file only, so a run directory can be
re-plotted offline with ``clipshape replot <dir>``.
"""
from __future__ import annotations

from collections import OrderedDict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .records import read_csv  # noqa: E402

# fixed hash salt and no timestamp keep the SVG bytes reproducible
plt.rcParams.update({
    "svg.hashsalt": "clipshape",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "figure.figsize": (5.0, 3.6),
})


def _groups(rows, key="pmf"):
    out = OrderedDict()
    for r in rows:
        out.setdefault(r[key], []).append(r)
    return out


def _xy(rows, x, y):
    return np.array([float(r[x]) for r in rows]), np.array([float(r[y]) for r in rows])


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_air(csv_path, svg_path) -> Path:
    rows = read_csv(csv_path)
    fig, ax = plt.subplots()
    lo, hi = np.inf, -np.inf
    for name, grp in _groups(rows).items():
        x, y = _xy(grp, "true_snr_db", "mi_bits")
        order = np.argsort(x)
        ax.plot(x[order], y[order], marker=".", ms=3, label=name)
        lo, hi = min(lo, x.min()), max(hi, x.max())
    s = np.linspace(lo, hi, 200)
    ax.plot(s, np.log2(1 + 10 ** (s / 10)), "k--", lw=1, label="AWGN capacity")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("AIR [bit/symbol]")
    ax.legend()
    return _save(fig, svg_path)


def _per_pmf(csv_path, svg_path, y, ylabel, x="k", xlabel="clipping ratio k", hline=None) -> Path:
    rows = read_csv(csv_path)
    fig, ax = plt.subplots()
    for name, grp in _groups(rows).items():
        xv, yv = _xy(grp, x, y)
        ok = np.isfinite(yv)
        ax.plot(xv[ok], yv[ok], marker=".", ms=3, label=name)
    if hline is not None:
        ax.axhline(hline, color="k", ls="--", lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    return _save(fig, svg_path)


def plot_b2b(csv_path, svg_path) -> Path:
    return _per_pmf(csv_path, svg_path, "snr_db", "digital SNR [dB]")


def plot_papr(csv_path, svg_path) -> Path:
    return _per_pmf(csv_path, svg_path, "papr_db", "PAPR [dB]")


def plot_power(csv_path, svg_path) -> Path:
    return _per_pmf(csv_path, svg_path, "tx_power_dbm", "Tx output power [dBm]")


def plot_budget(csv_path, svg_path) -> Path:
    return _per_pmf(csv_path, svg_path, "budget_db", "link budget [dB]")


def plot_ngmi_loss(csv_path, svg_path) -> Path:
    rows = read_csv(csv_path)
    thr = float(rows[0]["threshold"]) if rows else None
    return _per_pmf(csv_path, svg_path, "ngmi", "NGMI", x="loss_db", xlabel="link loss [dB]", hline=thr)


def plot_region(csv_path, svg_path) -> Path:
    rows = read_csv(csv_path)
    k, lo = _xy(rows, "k", "lower_db")
    _, hi = _xy(rows, "k", "upper_db")
    fig, ax = plt.subplots()
    ax.fill_between(k, lo, hi, color="tab:orange", alpha=0.3, label="region")
    skip = {"k", "lower_db", "upper_db"}
    for name in rows[0].keys():
        if name not in skip:
            ax.plot(k, _xy(rows, "k", name)[1], label=name)
    ax.set_xlabel("clipping ratio k")
    ax.set_ylabel("PAPR [dB]")
    ax.legend()
    return _save(fig, svg_path)


def plot_optimize(csv_path, svg_path) -> Path:
    rows = read_csv(csv_path)
    fig, ax = plt.subplots()
    k, snr = _xy(rows, "k", "b2b_snr_db")
    _, bud = _xy(rows, "k", "budget_db")
    ax.plot(k, snr, color="tab:blue", label="B2B digital SNR")
    ax.set_xlabel("clipping ratio k")
    ax.set_ylabel("digital SNR [dB]", color="tab:blue")
    ax2 = ax.twinx()
    ok = np.isfinite(bud)
    ax2.plot(k[ok], bud[ok], color="tab:red", label="E2E link budget")
    ax2.set_ylabel("link budget [dB]", color="tab:red")
    ax2.grid(False)
    return _save(fig, svg_path)


RENDERERS = {
    "air.csv": plot_air,
    "b2b_sweep.csv": plot_b2b,
    "papr_sweep.csv": plot_papr,
    "power_sweep.csv": plot_power,
    "budget_sweep.csv": plot_budget,
    "ngmi_vs_loss.csv": plot_ngmi_loss,
    "region.csv": plot_region,
    "optimize_curve.csv": plot_optimize,
}


def render_dir(run_dir) -> list[Path]:
    """(Re)render every known figure from the CSV files in `run_dir`."""
    run_dir = Path(run_dir)
    out = []
    for name, fn in RENDERERS.items():
        src = run_dir / name
        if src.exists():
            out.append(fn(src, src.with_suffix(".svg")))
    return out
