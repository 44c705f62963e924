"""Run configuration: flat JSON keys, defaults, and validation with field-level errors."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .linkmodel import LinkScenario
from .waveform import WaveformSpec

COMMANDS = ("air", "b2b-sweep", "papr-sweep", "power-sweep", "budget-sweep", "optimize", "region")

THREADS_ENV = "CLIPSHAPE_THREADS"


class ConfigError(ValueError):
    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


_SCENARIO_KEYS = {f.name for f in fields(LinkScenario)}
_WAVEFORM_KEYS = {"sps", "alpha", "span_symbols", "dac_bits", "num_symbols"}

# key -> (type check, range check, description of the valid range)
_RULES: dict[str, tuple] = {
    "peak_power_dbm": (_is_num, lambda v: True, "a number"),
    "noise_floor_dbm": (_is_num, lambda v: True, "a number"),
    "fec_threshold": (_is_num, lambda v: 0 < v < 1, "in (0, 1)"),
    "loss_min_db": (_is_num, lambda v: True, "a number"),
    "loss_max_db": (_is_num, lambda v: True, "a number"),
    "m_bits": (_is_int, lambda v: v >= 1, "an integer >= 1"),
    "sps": (_is_int, lambda v: v >= 2, "an integer >= 2"),
    "alpha": (_is_num, lambda v: 0 < v <= 1, "in (0, 1]"),
    "span_symbols": (_is_int, lambda v: v >= 1, "an integer >= 1"),
    "dac_bits": (_is_int, lambda v: v >= 4, "an integer >= 4"),
    "num_symbols": (_is_int, lambda v: v >= 1000, "an integer >= 1000"),
    "seed": (_is_int, lambda v: v >= 0, "a non-negative integer"),
    "k_min": (_is_num, lambda v: v > 0, "positive"),
    "k_max": (_is_num, lambda v: v > 0, "positive"),
    "k_step": (_is_num, lambda v: v > 0, "positive"),
    "pmf": (lambda v: isinstance(v, str), lambda v: True, "a pmf family name"),
    "pmfs": (lambda v: v is None or isinstance(v, (str, list)), lambda v: True, "a list of pmf names"),
    "entropy": (_is_num, lambda v: 0 < v <= 6, "in (0, 6] bits"),
    "threads": (_is_int, lambda v: v >= 1, "an integer >= 1"),
    "snr_min_db": (_is_num, lambda v: True, "a number"),
    "snr_max_db": (_is_num, lambda v: True, "a number"),
    "snr_step_db": (_is_num, lambda v: v > 0, "positive"),
    "loss_step_db": (_is_num, lambda v: v > 0, "positive"),
    "heavy_clip_k": (_is_num, lambda v: v > 0, "positive"),
    "out": (lambda v: isinstance(v, str), lambda v: True, "a directory path"),
    "scenario": (lambda v: v is None or isinstance(v, str), lambda v: True, "a file path"),
    "command": (lambda v: v is None or v in COMMANDS, lambda v: True, f"one of {', '.join(COMMANDS)}"),
}

RUN_DEFAULTS: dict[str, Any] = {
    "command": None,
    "out": "clipshape-out",
    "scenario": None,
    "seed": 0,
    "k_min": 1.0,
    "k_max": 5.0,
    "k_step": 0.1,
    "pmf": "mb",
    "pmfs": None,
    "entropy": 4.3,
    "threads": 1,
    "snr_min_db": 6.0,
    "snr_max_db": 18.0,
    "snr_step_db": 0.5,
    "loss_step_db": 0.5,
    # left edge of the Tx power sweep, used as the heavy-clipping reference
    "heavy_clip_k": 1.7,
}


def default_flat() -> dict[str, Any]:
    flat = dict(RUN_DEFAULTS)
    flat.update(LinkScenario().to_dict())
    w = WaveformSpec()
    flat.update({k: getattr(w, k) for k in sorted(_WAVEFORM_KEYS)})
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            flat["threads"] = max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}", "threads")
    return flat


@dataclass(frozen=True)
class RunConfig:
    command: Optional[str]
    scenario: LinkScenario
    waveform: WaveformSpec
    out_dir: str
    seed: int
    k_min: float
    k_max: float
    k_step: float
    pmf: str
    entropy: float
    pmfs: Optional[tuple[str, ...]]
    threads: int
    snr_min_db: float
    snr_max_db: float
    snr_step_db: float
    loss_step_db: float
    heavy_clip_k: float
    scenario_path: Optional[str] = field(default=None)

    @property
    def k_grid(self) -> np.ndarray:
        n = int(round((self.k_max - self.k_min) / self.k_step))
        return np.round(self.k_min + self.k_step * np.arange(n + 1), 10)

    @property
    def snr_grid(self) -> np.ndarray:
        n = int(round((self.snr_max_db - self.snr_min_db) / self.snr_step_db))
        return np.round(self.snr_min_db + self.snr_step_db * np.arange(n + 1), 10)

    def to_flat(self) -> dict[str, Any]:
        """Flat key/value form; feeding it back through `normalize` reproduces this config."""
        flat = {
            "command": self.command,
            "out": self.out_dir,
            "scenario": self.scenario_path,
            "seed": self.seed,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "k_step": self.k_step,
            "pmf": self.pmf,
            "pmfs": list(self.pmfs) if self.pmfs is not None else None,
            "entropy": self.entropy,
            "threads": self.threads,
            "snr_min_db": self.snr_min_db,
            "snr_max_db": self.snr_max_db,
            "snr_step_db": self.snr_step_db,
            "loss_step_db": self.loss_step_db,
            "heavy_clip_k": self.heavy_clip_k,
        }
        flat.update(self.scenario.to_dict())
        flat.update({k: getattr(self.waveform, k) for k in sorted(_WAVEFORM_KEYS)})
        return flat


def _check(key: str, value) -> None:
    if key not in _RULES:
        raise ConfigError(f"unknown config key {key!r}", key)
    is_type, in_range, desc = _RULES[key]
    if not is_type(value):
        raise ConfigError(f"{key!r} must be {desc}, got {value!r}", key)
    if value is not None and not in_range(value):
        raise ConfigError(f"{key!r} out of range: must be {desc}, got {value!r}", key)


def _load_json(path: str | Path, what: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc.strerror}") from exc
    if not text.strip():
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{what} {path}: top level must be a JSON object")
    return data


def normalize(overrides: dict[str, Any]) -> RunConfig:
    """Merge `overrides` into the defaults, validate every field, and build a RunConfig."""
    for key, value in overrides.items():
        _check(key, value)
    flat = default_flat()
    scen_path = overrides.get("scenario")
    if scen_path:
        scen = _load_json(scen_path, "scenario file")
        for key, value in scen.items():
            if key not in _SCENARIO_KEYS:
                raise ConfigError(f"unknown scenario key {key!r}", key)
            _check(key, value)
        flat.update(scen)
    flat.update(overrides)
    if not flat["k_max"] > flat["k_min"]:
        raise ConfigError("'k_max' must exceed 'k_min'", "k_max")
    if not flat["loss_max_db"] > flat["loss_min_db"]:
        raise ConfigError("'loss_max_db' must exceed 'loss_min_db'", "loss_max_db")
    if not flat["snr_max_db"] >= flat["snr_min_db"]:
        raise ConfigError("'snr_max_db' must not be below 'snr_min_db'", "snr_max_db")
    pmfs = flat["pmfs"]
    if isinstance(pmfs, str):
        pmfs = [p for p in (s.strip() for s in pmfs.split(",")) if p]
    from . import families  # local import keeps config importable without shaping

    for name in [flat["pmf"], *(pmfs or [])]:
        try:
            families.parse(name, flat["entropy"])
        except ValueError as exc:
            raise ConfigError(str(exc), "pmfs" if name != flat["pmf"] else "pmf") from exc
    scenario = LinkScenario(**{k: flat[k] for k in _SCENARIO_KEYS})
    waveform = WaveformSpec(seed=flat["seed"], **{k: flat[k] for k in _WAVEFORM_KEYS})
    return RunConfig(
        command=flat["command"],
        scenario=scenario,
        waveform=waveform,
        out_dir=flat["out"],
        seed=flat["seed"],
        k_min=float(flat["k_min"]),
        k_max=float(flat["k_max"]),
        k_step=float(flat["k_step"]),
        pmf=flat["pmf"],
        entropy=float(flat["entropy"]),
        pmfs=tuple(pmfs) if pmfs is not None else None,
        threads=flat["threads"],
        snr_min_db=float(flat["snr_min_db"]),
        snr_max_db=float(flat["snr_max_db"]),
        snr_step_db=float(flat["snr_step_db"]),
        loss_step_db=float(flat["loss_step_db"]),
        heavy_clip_k=float(flat["heavy_clip_k"]),
        scenario_path=scen_path,
    )


def validate_config(path: str | Path) -> RunConfig:
    """Load a flat JSON config file and return it with all defaults resolved.

    An empty file yields the full default configuration.
    """
    return normalize(_load_json(path, "config file"))
