import json
import math

import numpy as np
import pytest

from clipshape import __version__
from clipshape.cli import main
from clipshape.config import ConfigError, RUN_DEFAULTS, THREADS_ENV, normalize, validate_config
from clipshape.records import read_csv, write_csv

FAST = ["--k-min", "1.5", "--k-max", "3.5", "--k-step", "0.5", "--num-symbols", "20000"]


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


# --- configuration -------------------------------------------------------------------


def test_empty_config_gives_defaults(tmp_path, capsys):
    assert main(["validate-config", write(tmp_path, "c.json", "")]) == 0
    flat = json.loads(capsys.readouterr().out)
    assert flat["fec_threshold"] == 5 / 6
    assert flat["k_min"] == 1.0 and flat["k_max"] == 5.0 and flat["k_step"] == 0.1
    assert flat["dac_bits"] == 8 and flat["alpha"] == 0.2 and flat["sps"] == 2


def test_out_of_range_field_is_named(tmp_path, capsys):
    assert main(["validate-config", write(tmp_path, "c.json", {"alpha": 1.5})]) == 1
    assert "alpha" in capsys.readouterr().err


def test_unknown_key_is_named(tmp_path):
    with pytest.raises(ConfigError) as exc:
        validate_config(write(tmp_path, "c.json", {"alpah": 0.2}))
    assert exc.value.field == "alpah" and "alpah" in str(exc.value)


def test_wrong_type_is_named():
    with pytest.raises(ConfigError) as exc:
        normalize({"dac_bits": 8.5})
    assert exc.value.field == "dac_bits"


def test_parse_error_reports_position(tmp_path):
    with pytest.raises(ConfigError, match="line 2, column"):
        validate_config(write(tmp_path, "c.json", '{\n  "seed": ,\n}'))


def test_cross_field_checks():
    with pytest.raises(ConfigError, match="k_max"):
        normalize({"k_min": 3.0, "k_max": 2.0})
    with pytest.raises(ConfigError) as exc:
        normalize({"pmfs": "ud,qam7"})
    assert exc.value.field == "pmfs"


def test_scenario_file_merges(tmp_path):
    cfg = normalize({"scenario": write(tmp_path, "s.json", {"noise_floor_dbm": -30.0})})
    assert cfg.scenario.noise_floor_dbm == -30.0
    assert cfg.scenario.fec_threshold == 5 / 6
    with pytest.raises(ConfigError, match="bogus"):
        normalize({"scenario": write(tmp_path, "t.json", {"bogus": 1})})


def test_threads_env_fallback(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert normalize({}).threads == 3
    assert normalize({"threads": 2}).threads == 2
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        normalize({})


def test_flat_roundtrip():
    cfg = normalize({"command": "region", "pmfs": "mb4.3,ud,ppc4.3", "seed": 9})
    assert normalize(cfg.to_flat()) == cfg
    assert RUN_DEFAULTS["heavy_clip_k"] == cfg.heavy_clip_k


# --- records -------------------------------------------------------------------------


def test_csv_dialect(tmp_path):
    p = write_csv(tmp_path / "x.csv", ("a", "b"), [(1, 0.1), (np.int64(2), np.float64(math.nan))])
    raw = p.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines() == ["a,b", "1,0.1", "2,nan", "# manifest: manifest.json"]
    assert read_csv(p) == [{"a": "1", "b": "0.1"}, {"a": "2", "b": "nan"}]


# --- commands ------------------------------------------------------------------------


def test_papr_sweep_outputs_and_determinism(tmp_path):
    args = ["papr-sweep", *FAST]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    for name in ("papr_sweep.csv", "papr_sweep.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = read_csv(tmp_path / "a" / "papr_sweep.csv")
    assert list(rows[0]) == ["pmf", "k", "papr_db", "snr_db"]
    assert {r["pmf"] for r in rows} == {"mb4.3", "ud", "ppc4.3"}
    text = (tmp_path / "a" / "papr_sweep.csv").read_text()
    assert text.endswith("# manifest: manifest.json\n")
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["version"] == __version__ and man["seed"] == 0
    assert man["outputs"] == ["papr_sweep.csv", "papr_sweep.svg"]
    # the manifest alone replays the run
    assert normalize(man["config"]).to_flat() == man["config"]


def test_optimize_json(tmp_path):
    out = tmp_path / "opt"
    assert main(["optimize", "--pmf", "mb", "--entropy", "4.3", *FAST, "--out", str(out)]) == 0
    doc = json.loads((out / "optimize.json").read_text())
    assert doc["pmf"] == "mb4.3"
    assert doc["k_star"] == doc["e2e"]["k_star"]
    assert [p[0] for p in doc["e2e"]["curve"]] == [1.5, 2.0, 2.5, 3.0, 3.5]
    assert len(doc["config_hash"]) == 16
    assert read_csv(out / "e2e_curve.csv")[0].keys() == {"k", "objective_db"}
    assert (out / "optimize_curve.svg").exists()


def test_air_five_families(tmp_path):
    cfg = write(tmp_path, "c.json", {"snr_min_db": 10.0, "snr_max_db": 12.0, "snr_step_db": 2.0})
    out = tmp_path / "air"
    assert main(["air", "--config", cfg, "--pmfs", "ud,mb4.3,mb5.2,ppc,ppc60", "--out", str(out)]) == 0
    rows = read_csv(out / "air.csv")
    assert list(rows[0]) == ["pmf", "noise_var", "true_snr_db", "mi_bits", "avg_power", "peak_power"]
    assert [*dict.fromkeys(r["pmf"] for r in rows)] == ["ud", "mb4.3", "mb5.2", "ppc", "ppc60"]
    assert (out / "air.svg").exists()


def test_power_and_budget_sweeps(tmp_path):
    assert main(["power-sweep", *FAST, "--pmfs", "ppc4.3,mb4.3", "--out", str(tmp_path / "p")]) == 0
    summ = json.loads((tmp_path / "p" / "power_summary.json").read_text())
    assert summ["mb4.3"]["k_heavy"] == 1.7
    assert main(["budget-sweep", *FAST, "--pmfs", "ppc4.3", "--out", str(tmp_path / "b")]) == 0
    rows = read_csv(tmp_path / "b" / "ngmi_vs_loss.csv")
    assert float(rows[0]["threshold"]) == 5 / 6
    assert (tmp_path / "b" / "ngmi_vs_loss.svg").exists()


def test_b2b_and_region(tmp_path):
    assert main(["b2b-sweep", *FAST, "--pmfs", "ud,mb4.3", "--out", str(tmp_path / "b")]) == 0
    assert set(json.loads((tmp_path / "b" / "b2b_summary.json").read_text())) == {"ud", "mb4.3"}
    assert main(["region", *FAST, "--out", str(tmp_path / "r")]) == 0
    assert list(read_csv(tmp_path / "r" / "region.csv")[0]) == ["k", "lower_db", "upper_db", "mb4.3", "ud", "ppc4.3"]
    assert main(["region", *FAST, "--pmfs", "ud,mb4.3", "--out", str(tmp_path / "x")]) == 1


def test_replot_is_pure_function_of_csv(tmp_path):
    out = tmp_path / "r"
    assert main(["papr-sweep", *FAST, "--pmfs", "ud", "--out", str(out)]) == 0
    before = (out / "papr_sweep.svg").read_bytes()
    (out / "papr_sweep.svg").unlink()
    assert main(["replot", str(out)]) == 0
    assert (out / "papr_sweep.svg").read_bytes() == before


def test_exit_codes(tmp_path):
    assert main(["papr-sweep", "--pmf", "qam7"]) == 1
    assert main(["papr-sweep", "--no-such-flag"]) == 1
    assert main(["power-sweep", *FAST, "--config", write(tmp_path, "h.json", {"heavy_clip_k": 9.0}),
                 "--out", str(tmp_path / "h")]) == 1
    infeasible = write(tmp_path, "nf.json", {"noise_floor_dbm": 0.0})
    assert main(["optimize", "--pmf", "ud", *FAST, "--config", infeasible, "--out", str(tmp_path / "o")]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["papr-sweep", *FAST, "--pmfs", "ud", "--out", str(blocker / "sub")]) == 3
