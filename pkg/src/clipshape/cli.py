"""Command-line front end: ``clipshape <command> [options]``.

Each command writes CSV data, SVG figures and a ``manifest.json`` holding the
fully resolved configuration into the output directory.

Exit status: 0 success, 1 invalid configuration, 2 infeasible scenario,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__, families, plotting
from .clipopt import feasible_region, optimize_b2b, optimize_e2e
from .config import COMMANDS, ConfigError, RunConfig, normalize, validate_config, _load_json
from .constellation import average_power, make_square_qam
from .errors import NoBudgetError
from .linkmodel import budget_curve, ngmi_vs_loss, tx_power
from .records import MANIFEST_NAME, write_csv, write_json
from .shaping import air_curve
from .waveform import clip_sweep

log = logging.getLogger("clipshape")

DEFAULT_PMFS = {
    "air": ("ud", "mb4.3", "mb5.2", "ppc", "ppc60"),
    "b2b-sweep": ("ppc4.3", "ppc5.2", "ud", "mb4.3", "mb5.2"),
    "papr-sweep": ("mb4.3", "ud", "ppc4.3"),
    "power-sweep": ("ppc4.3", "mb4.3", "ud"),
    "budget-sweep": ("ppc4.3", "mb4.3", "ud"),
    "region": ("mb4.3", "ud", "ppc4.3"),
}


def _pmfs(cfg: RunConfig) -> tuple[str, ...]:
    return cfg.pmfs if cfg.pmfs is not None else DEFAULT_PMFS[cfg.command]


def _spec(cfg: RunConfig):
    return cfg.waveform


# --- commands ----------------------------------------------------------------------


def run_air(cfg: RunConfig, out: Path) -> list[Path]:
    rows = []
    # BA curves share one noise grid referenced to uniform 64QAM, i.e. equal peak SNR
    ref_power = average_power(make_square_qam(64))
    for name in _pmfs(cfg):
        kind, _ = families.parse(name, cfg.entropy)
        if kind in ("ppc", "ppc60"):
            base = families.support(name)
            grid = np.arange(cfg.snr_min_db - 4.0, cfg.snr_max_db + 1e-9, cfg.snr_step_db)
            noise = ref_power / 10 ** (grid / 10)
            pts = air_curve(base, noise, optimize=True, workers=cfg.threads)
        else:
            c = families.build(name, cfg.entropy)
            noise = average_power(c) / 10 ** (cfg.snr_grid / 10)
            pts = air_curve(c, noise, optimize=False, workers=cfg.threads)
        for p in pts:
            rows.append((name, p.noise_var, p.true_snr_db, p.mi_bits, p.avg_power, p.peak_power))
    csv = write_csv(out / "air.csv",
                    ("pmf", "noise_var", "true_snr_db", "mi_bits", "avg_power", "peak_power"), rows)
    return [csv, plotting.plot_air(csv, out / "air.svg")]


def run_b2b_sweep(cfg: RunConfig, out: Path) -> list[Path]:
    rows, summary = [], {}
    for name in _pmfs(cfg):
        res = optimize_b2b(families.build(name, cfg.entropy), _spec(cfg), cfg.k_grid)
        label = families.label(name, cfg.entropy)
        rows += [(label, k, v) for k, v in res.curve]
        summary[label] = {"k_star": res.k_star, "snr_db": res.objective_at_star}
    csv = write_csv(out / "b2b_sweep.csv", ("pmf", "k", "snr_db"), rows)
    js = write_json(out / "b2b_summary.json", summary)
    return [csv, js, plotting.plot_b2b(csv, out / "b2b_sweep.svg")]


def run_papr_sweep(cfg: RunConfig, out: Path) -> list[Path]:
    rows = []
    for name in _pmfs(cfg):
        label = families.label(name, cfg.entropy)
        rows += [(label, *r) for r in clip_sweep(families.build(name, cfg.entropy), _spec(cfg), cfg.k_grid)]
    csv = write_csv(out / "papr_sweep.csv", ("pmf", "k", "papr_db", "snr_db"), rows)
    return [csv, plotting.plot_papr(csv, out / "papr_sweep.svg")]


def run_power_sweep(cfg: RunConfig, out: Path) -> list[Path]:
    if cfg.heavy_clip_k >= cfg.k_max:
        raise ConfigError("'heavy_clip_k' must lie below 'k_max'", "heavy_clip_k")
    # the sweep starts at the heavy-clipping reference point
    ks = [cfg.heavy_clip_k] + [float(k) for k in cfg.k_grid if k > cfg.heavy_clip_k + 1e-9]
    rows, summary = [], {}
    for name in _pmfs(cfg):
        c = families.build(name, cfg.entropy)
        label = families.label(name, cfg.entropy)
        rows += [(label, k, tx_power(k, c, _spec(cfg), cfg.scenario)) for k in ks]
        k_b2b = optimize_b2b(c, _spec(cfg), cfg.k_grid).k_star
        p_heavy = tx_power(ks[0], c, _spec(cfg), cfg.scenario)
        p_b2b = tx_power(k_b2b, c, _spec(cfg), cfg.scenario)
        summary[label] = {"k_b2b": k_b2b, "tx_at_b2b_dbm": p_b2b, "k_heavy": ks[0],
                          "tx_at_heavy_dbm": p_heavy, "heavy_clip_gain_db": p_heavy - p_b2b}
    csv = write_csv(out / "power_sweep.csv", ("pmf", "k", "tx_power_dbm"), rows)
    js = write_json(out / "power_summary.json", summary)
    return [csv, js, plotting.plot_power(csv, out / "power_sweep.svg")]


def run_budget_sweep(cfg: RunConfig, out: Path) -> list[Path]:
    rows, loss_rows, summary = [], [], {}
    sc = cfg.scenario
    losses = np.round(np.arange(sc.loss_min_db, sc.loss_max_db + 1e-9, cfg.loss_step_db), 10)
    for name in _pmfs(cfg):
        c = families.build(name, cfg.entropy)
        label = families.label(name, cfg.entropy)
        pts = budget_curve(c, _spec(cfg), sc, cfg.k_grid, workers=cfg.threads)
        rows += [(label, p.k, p.tx_power_dbm, p.budget_db, p.ngmi_at_budget) for p in pts]
        finite = [p for p in pts if not math.isnan(p.budget_db)]
        if not finite:
            summary[label] = None
            continue
        best = max(finite, key=lambda p: (p.budget_db, -p.k))
        summary[label] = {"k_link": best.k, "budget_db": best.budget_db}
        for loss, v in ngmi_vs_loss(best.k, c, _spec(cfg), sc, losses):
            loss_rows.append((label, best.k, loss, v, sc.fec_threshold))
    if all(v is None for v in summary.values()):
        raise NoBudgetError("no pmf meets the FEC threshold at any k")
    csv = write_csv(out / "budget_sweep.csv", ("pmf", "k", "tx_power_dbm", "budget_db", "ngmi_at_budget"), rows)
    csv2 = write_csv(out / "ngmi_vs_loss.csv", ("pmf", "k", "loss_db", "ngmi", "threshold"), loss_rows)
    js = write_json(out / "budget_summary.json", summary)
    return [csv, csv2, js, plotting.plot_budget(csv, out / "budget_sweep.svg"),
            plotting.plot_ngmi_loss(csv2, out / "ngmi_vs_loss.svg")]


def run_optimize(cfg: RunConfig, out: Path) -> list[Path]:
    c = families.build(cfg.pmf, cfg.entropy)
    b2b = optimize_b2b(c, _spec(cfg), cfg.k_grid)
    e2e = optimize_e2e(c, _spec(cfg), cfg.scenario, cfg.k_grid, workers=cfg.threads)
    # the hash identifies the computation, not where it was written
    flat = {k: v for k, v in cfg.to_flat().items() if k != "out"}
    doc = {
        "pmf": families.label(cfg.pmf, cfg.entropy),
        "b2b": {**b2b.summary(), "curve": [list(p) for p in b2b.curve]},
        "e2e": {**e2e.summary(), "curve": [list(p) for p in e2e.curve]},
        "k_star": e2e.k_star,
        "budget_db": e2e.objective_at_star,
        "config_hash": b2b.summary(flat)["config_hash"],
    }
    js = write_json(out / "optimize.json", doc)
    rows = [(k, s, b) for (k, s), (_, b) in zip(b2b.curve, e2e.curve)]
    csv = write_csv(out / "optimize_curve.csv", ("k", "b2b_snr_db", "budget_db"), rows)
    b2b_csv = write_csv(out / "b2b_curve.csv", ("k", "objective_db"), b2b.curve)
    e2e_csv = write_csv(out / "e2e_curve.csv", ("k", "objective_db"), e2e.curve)
    return [js, csv, b2b_csv, e2e_csv, plotting.plot_optimize(csv, out / "optimize_curve.svg")]


def run_region(cfg: RunConfig, out: Path) -> list[Path]:
    names = _pmfs(cfg)
    labels = [families.label(n, cfg.entropy) for n in names]
    upper = next((lab for lab in labels if lab.startswith("mb")), None)
    lower = next((lab for lab in labels if lab.startswith("ppc")), None)
    if upper is None or lower is None:
        raise ConfigError("region needs one mb and one ppc member in 'pmfs'", "pmfs")
    fam = {lab: families.build(n, cfg.entropy) for lab, n in zip(labels, names)}
    rows = feasible_region(fam, cfg.k_grid, _spec(cfg), upper=upper, lower=lower)
    csv = write_csv(out / "region.csv", ("k", "lower_db", "upper_db", *labels),
                    [(r.k, r.lower_db, r.upper_db, *(r.members[lab] for lab in labels)) for r in rows])
    return [csv, plotting.plot_region(csv, out / "region.svg")]


RUNNERS: dict[str, Callable[[RunConfig, Path], list[Path]]] = {
    "air": run_air,
    "b2b-sweep": run_b2b_sweep,
    "papr-sweep": run_papr_sweep,
    "power-sweep": run_power_sweep,
    "budget-sweep": run_budget_sweep,
    "optimize": run_optimize,
    "region": run_region,
}


def run(cfg: RunConfig) -> int:
    """Execute `cfg.command`, write artifacts and the manifest, and return the exit status."""
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = RUNNERS[cfg.command](cfg, out)
        manifest = {
            "tool": "clipshape",
            "version": __version__,
            "command": cfg.command,
            "seed": cfg.seed,
            "config": cfg.to_flat(),
            "outputs": sorted(p.name for p in written),
        }
        write_json(out / MANIFEST_NAME, manifest)
    except NoBudgetError as exc:
        log.error("infeasible scenario: %s", exc)
        return 2
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return 1
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return 3
    log.info("wrote %d files to %s", len(written) + 1, out)
    return 0


# --- argument parsing ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit 1, keeping 2 for infeasible scenarios."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--scenario", help="JSON file with LinkScenario fields")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--k-min", dest="k_min", type=float)
    p.add_argument("--k-max", dest="k_max", type=float)
    p.add_argument("--k-step", dest="k_step", type=float)
    p.add_argument("--pmf", help="ud | mb | ppc | ppc60 (optionally with entropy suffix, e.g. mb4.3)")
    p.add_argument("--pmfs", help="comma-separated pmf names")
    p.add_argument("--entropy", type=float, help="entropy in bits for bare mb/ppc names")
    p.add_argument("--dac-bits", dest="dac_bits", type=int)
    p.add_argument("--num-symbols", dest="num_symbols", type=int)
    p.add_argument("--threads", type=int, help="worker threads (env CLIPSHAPE_THREADS)")


_FLAG_KEYS = ("scenario", "out", "seed", "k_min", "k_max", "k_step", "pmf", "pmfs", "entropy",
              "dac_bits", "num_symbols", "threads")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clipshape", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"clipshape {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(sub.add_parser(name, help=f"run the {name} computation"))
    v = sub.add_parser("validate-config", help="print the normalized configuration")
    v.add_argument("path")
    r = sub.add_parser("replot", help="re-render SVG figures from the CSV files of a run")
    r.add_argument("run_dir")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    merged = _load_json(args.config, "config file") if args.config else {}
    for key in _FLAG_KEYS:
        val = getattr(args, key)
        if val is not None:
            merged[key] = val
    merged["command"] = args.command
    return normalize(merged)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "validate-config":
        try:
            cfg = validate_config(args.path)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(json.dumps(cfg.to_flat(), indent=2, sort_keys=True))
        return 0
    if args.command == "replot":
        try:
            paths = plotting.render_dir(args.run_dir)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
        for p in paths:
            print(p)
        return 0
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
