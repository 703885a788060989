import json
import math

import numpy as np
import pytest

from wignerxft.cli import main
from wignerxft.config import ConfigError, config_from_dict, parse_config, showcase_config
from wignerxft.runner import PLOT_KINDS, read_csv


def minimal(**overrides):
    raw = {
        "oscillators": {"A": {"omega": 1.0, "temperature": 2.0}, "B": {"omega": 1.0, "temperature": 1.0}},
        "coupling": {"kind": "beam_splitter", "strength": 1.0},
        "tau": math.pi / 2,
    }
    raw.update(overrides)
    return raw


def write_config(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


def test_minimal_config_defaults():
    cfg = config_from_dict(minimal())
    assert cfg.hbar == 1.0
    assert cfg.n_samples == 100_000
    assert cfg.seed == 0
    assert cfg.histogram.bin_width is None and cfg.histogram.min_count == 25
    assert cfg.s_values == (0.25, 0.5, 0.75, 1.0)


def test_negative_temperature_names_the_key():
    raw = minimal()
    raw["oscillators"]["B"]["temperature"] = -1.0
    with pytest.raises(ConfigError) as exc:
        config_from_dict(raw)
    assert exc.value.code == "non_positive"
    assert "temperature" in exc.value.key


def test_unknown_coupling_lists_kinds():
    with pytest.raises(ConfigError) as exc:
        config_from_dict(minimal(coupling={"kind": "cubic", "strength": 1.0}))
    assert exc.value.code == "unknown_coupling"
    for kind in ("beam_splitter", "position_position", "two_mode_squeeze"):
        assert kind in str(exc.value)


@pytest.mark.parametrize(
    "overrides,code",
    [
        ({"tau": "long"}, "invalid_type"),
        ({"n_samples": 10}, "invalid_value"),
        ({"seed": -1}, "non_positive"),
        ({"extra": 1}, "unknown_key"),
        ({"hbar": 0}, "non_positive"),
    ],
)
def test_config_errors(overrides, code):
    with pytest.raises(ConfigError) as exc:
        config_from_dict(minimal(**overrides))
    assert exc.value.code == code


def test_missing_key():
    raw = minimal()
    del raw["tau"]
    with pytest.raises(ConfigError) as exc:
        config_from_dict(raw)
    assert exc.value.code == "missing_key" and exc.value.key == "tau"


def test_round_trip(tmp_path):
    cfg = showcase_config(n_samples=5000, seed=7)
    again = parse_config(write_config(tmp_path, cfg.to_dict()))
    assert again == cfg


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert exc.value.code == "unreadable"
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2


def test_simulate_writes_parseable_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path, minimal(n_samples=100_000, seed=3))
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    names = {"heat_samples.json", "histogram.csv", "xft_fit.json", "mgf.json", "clausius.json", "manifest.json"}
    assert names <= {f.name for f in out.iterdir()}
    for name in names - {"histogram.csv"}:
        json.loads((out / name).read_text())
    cols = read_csv(out / "histogram.csv")
    assert set(cols) >= {"Q_center", "density", "count", "density_reversed", "log_ratio", "log_ratio_err"}
    width = cols["Q_center"][1] - cols["Q_center"][0]
    assert np.sum(cols["density"]) * width == pytest.approx(1.0, abs=1e-3)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok" and manifest["exit_code"] == 0
    assert manifest["seed"] == 3

    for kind in PLOT_KINDS[:3]:
        assert main(["plot-data", "--manifest", str(out / "manifest.json"), "--kind", kind]) == 0
        path = out / f"plot_{kind}.dat"
        data = np.loadtxt(path, comments="#", ndmin=2)
        assert data.shape[0] > 0
    assert main(["plot-data", "--manifest", str(out / "manifest.json"), "--kind", "bogus"]) == 2
    assert "slope" in capsys.readouterr().out


def test_zero_coupling_exits_degenerate(tmp_path):
    cfg = write_config(tmp_path, minimal(coupling={"kind": "beam_splitter", "strength": 0.0}, n_samples=5000))
    out = tmp_path / "zero"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "degenerate"
    assert json.loads((out / "xft_fit.json").read_text())["category"] == "numerical_degeneracy"


def test_bad_config_exits_2(tmp_path):
    cfg = write_config(tmp_path, minimal(coupling={"kind": "cubic", "strength": 1.0}))
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_hbar_sweep_and_plot(tmp_path):
    raw = minimal(n_samples=50_000, sweep={"hbar": [0.4, 0.2, 0.1, 0.05]})
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(write_config(tmp_path, raw)), "--axis", "hbar", "--out", str(out)]) == 0
    cols = read_csv(out / "limit_sweep.csv")
    np.testing.assert_allclose(cols["hbar"], [0.4, 0.2, 0.1, 0.05])
    assert main(["plot-data", "--manifest", str(out / "manifest.json"), "--kind", "classical_limit"]) == 0


def test_lambda_sweep(tmp_path):
    raw = minimal(
        oscillators={"A": {"omega": 1.0, "temperature": 2.0}, "B": {"omega": 1.5, "temperature": 1.0}},
        coupling={"kind": "position_position", "strength": 0.4},
        tau=5.0,
        n_samples=20_000,
        sweep={"lambda": [0.4, 0.2]},
    )
    out = tmp_path / "lam"
    assert main(["sweep", "--config", str(write_config(tmp_path, raw)), "--axis", "lambda", "--out", str(out)]) == 0
    assert (out / "lambda_sweep.csv").exists()


def test_csv_outputs_are_byte_identical_across_threads(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, minimal(n_samples=140_000, seed=11))
    monkeypatch.setenv("WIGNERXFT_THREADS", "1")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("WIGNERXFT_THREADS", "3")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "histogram.csv").read_bytes() == (tmp_path / "b" / "histogram.csv").read_bytes()
