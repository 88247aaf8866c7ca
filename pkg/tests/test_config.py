"""
配置测试：RunConfig 的默认值、校验与 JSON 往返，以及环境变量
"""
import json
import logging
import math
import os

import pytest

from src.config import Config, GridConfig, RunConfig
from src.data_models import DissipatorMode, GridSpec, ModelKind
from src.errors import ConfigError


def test_documented_defaults():
    data = RunConfig().to_dict()
    assert data["model"] == "dicke"
    assert data["mode"] == "dressed"
    assert data["branch"] == 1
    params = data["params"]
    assert (params["omega_p"], params["omega_a"], params["omega_e"]) == (1.0, 1.0, 1.0)
    assert (params["kappa"], params["gamma_l"], params["gamma_g"]) == (0.1, 0.1, 0.0)
    integration = data["integration"]
    assert integration["dt"] == pytest.approx(2 * math.pi / 1000)
    assert integration["t_end"] == pytest.approx(10000 * math.pi)
    assert integration["discard_fraction"] == 0.8
    assert integration["perturbation"] == 0.0
    assert data["thresholds"] == {"eps_order": 0.01, "eps_sigma": 0.005}


def test_round_trip_is_identity(tmp_path):
    config = RunConfig.from_dict({
        "model": "tc",
        "mode": "bare",
        "branch": -1,
        "params": {"g": 0.35, "xi": 0.62},
        "integration": {"t_end": 200 * math.pi, "sample_stride": 5},
        "thresholds": {"eps_order": 0.02},
        "grid": {"g_steps": 4, "xi_max": 0.8},
        "output": {"sweep": "out/scan.csv", "report": "out/scan.md"},
    })
    path = tmp_path / "config.json"
    text = config.dump(str(path))
    reloaded = RunConfig.load(str(path))
    assert reloaded.to_dict() == config.to_dict()
    assert json.loads(text) == config.to_dict()
    assert reloaded.model is ModelKind.TAVIS_CUMMINGS
    assert reloaded.mode is DissipatorMode.BARE
    assert reloaded.params.kappa == 0.1


def test_params_section_merges_over_defaults():
    config = RunConfig.from_dict({"params": {"g": 0.6}})
    assert config.params.g == 0.6
    assert config.params.gamma_l == 0.1


@pytest.mark.parametrize("data", [
    {"unknown": 1},
    {"params": {"g": 0.3, "delta": 1.0}},
    {"integration": {"steps": 10}},
    {"thresholds": {"eps": 0.1}},
    {"grid": {"g_count": 3}},
    {"output": {"plot": "x.png"}},
    {"params": [0.3]},
])
def test_unknown_keys_rejected(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


@pytest.mark.parametrize("data", [
    {"model": "rabi"},
    {"mode": "lindblad"},
    {"branch": 2},
    {"branch": 1.9},
    {"branch": True},
    {"branch": "1"},
    {"params": {"kappa": -0.1}},
    {"params": {"omega_e": 0.0}},
    {"params": {"g": "strong"}},
    {"integration": {"dt": 0.5}},
    {"integration": {"t_end": 10.0}},
    {"integration": {"sample_stride": 0}},
    {"integration": {"discard_fraction": 1.0}},
    {"thresholds": {"eps_order": 0.0}},
    {"grid": {"g_steps": 0}},
    {"grid": {"xi_steps": 2.5}},
    {"grid": {"g_min": 1.0, "g_max": 0.5}},
    {"model": "tc", "mode": "effective"},
])
def test_invalid_values_rejected(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError):
        RunConfig.from_dict({"branch": 3})


def test_read_document_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding='utf-8')
    with pytest.raises(ConfigError):
        RunConfig.load(str(broken))
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]", encoding='utf-8')
    with pytest.raises(ConfigError):
        RunConfig.load(str(listing))


def test_averaging_window_check():
    RunConfig().check_averaging_window()
    short = RunConfig.from_dict({"integration": {"t_end": 40 * math.pi}})
    with pytest.raises(ConfigError):
        short.check_averaging_window()
    kept = RunConfig.from_dict({"integration": {"t_end": 40 * math.pi, "discard_fraction": 0.1}})
    kept.check_averaging_window()


def test_to_grid_spec():
    config = RunConfig.from_dict({
        "params": {"kappa": 0.05},
        "grid": {"g_min": 0.35, "g_max": 0.35, "g_steps": 1, "xi_min": 0.36, "xi_max": 1.0, "xi_steps": 65},
        "thresholds": {"eps_sigma": 0.01},
    })
    spec = config.to_grid_spec()
    assert isinstance(spec, GridSpec)
    assert spec.template.kappa == 0.05
    assert spec.eps_sigma == 0.01
    assert spec.integration.dt == pytest.approx(2 * math.pi / 1000)
    assert len(spec.points()) == 65

    short = RunConfig.from_dict({"integration": {"t_end": 40 * math.pi}})
    with pytest.raises(ConfigError):
        short.to_grid_spec()


def test_grid_config_validation():
    GridConfig().validate()
    with pytest.raises(ConfigError):
        GridConfig(g_steps=True).validate()
    with pytest.raises(ConfigError):
        GridConfig(xi_min=-1.0).validate()


def test_workers_from_environment(monkeypatch):
    monkeypatch.setattr(Config, "SWEEP_WORKERS", Config.SWEEP_WORKERS)
    monkeypatch.setattr(Config, "LOG_LEVEL", Config.LOG_LEVEL)
    monkeypatch.setattr(Config, "OUTPUT_DIR", Config.OUTPUT_DIR)

    monkeypatch.setenv("SWEEP_WORKERS", "3")
    assert Config.load_from_env().SWEEP_WORKERS == 3
    monkeypatch.setenv("SWEEP_WORKERS", "0")
    assert Config.load_from_env().SWEEP_WORKERS == 1
    monkeypatch.setenv("SWEEP_WORKERS", "many")
    with pytest.raises(ConfigError):
        Config.load_from_env()


def test_branch_accepts_exact_signs():
    assert RunConfig.from_dict({"branch": -1}).branch == -1
    assert RunConfig.from_dict({"branch": 1.0}).branch == 1


def test_output_paths_follow_output_dir(monkeypatch, tmp_path):
    monkeypatch.setattr(Config, "OUTPUT_DIR", Config.OUTPUT_DIR)
    runs = tmp_path / "runs"
    monkeypatch.setenv("OUTPUT_DIR", str(runs))
    Config.load_from_env()
    assert runs.is_dir()

    output = RunConfig().output
    assert output.trajectory == os.path.join(str(runs), "trajectory.csv")
    assert output.sweep == os.path.join(str(runs), "sweep.csv")
    # 显式给出的路径不受影响
    assert RunConfig.from_dict({"output": {"sweep": "elsewhere.csv"}}).output.sweep == "elsewhere.csv"


def test_log_level_from_environment(monkeypatch):
    monkeypatch.setattr(Config, "LOG_LEVEL", Config.LOG_LEVEL)
    root = logging.getLogger()
    previous = root.level
    try:
        monkeypatch.setenv("LOG_LEVEL", "warning")
        Config.load_from_env()
        assert root.level == logging.WARNING
        monkeypatch.setenv("LOG_LEVEL", "LOUD")
        with pytest.raises(ConfigError):
            Config.load_from_env()
    finally:
        root.setLevel(previous)
