"""Experiment configuration parsing and validation."""

from pathlib import Path

import pytest

from config import DEFAULT_SEED
from utils.errors import ConfigurationError
from utils.experiment_config import ExperimentKind, load_config, parse_config

EXPERIMENT_FILES = sorted((Path(__file__).resolve().parent.parent / "experiments").glob("*.json"))


def test_minimal_config():
    cfg = parse_config({"experiment": "lln"})
    assert cfg.experiment is ExperimentKind.LLN
    assert cfg.seed == DEFAULT_SEED
    assert cfg.label == "lln"
    assert cfg.steps == [1] and cfg.starts == [0.0]
    assert cfg.output.csv and not cfg.output.dump


def test_name_is_the_label():
    assert parse_config({"experiment": "clt", "name": "clt_laplace"}).label == "clt_laplace"


@pytest.mark.parametrize("data, field", [
    ({"experiment": "lln", "bogus": 1}, "bogus"),
    ({"experiment": "teleport"}, "experiment"),
    ({"experiment": "invariance", "N": -5}, "N"),
    ({"experiment": "lln", "seed": -1}, "seed"),
    ({"experiment": "clt", "M": 0}, "M"),
    ({"experiment": "torus", "torus": {"d": 3, "pmf": [[1, 1.0]]}}, "torus.d"),
    ({"experiment": "lln", "output": {"format": "xml"}}, "output.format"),
    ({"experiment": "lln", "thresholds": {"ks": 0}}, "thresholds.ks"),
    ({"seed": 1}, "experiment"),
])
def test_invalid_configs_name_the_field(data, field):
    with pytest.raises(ConfigurationError) as info:
        parse_config(data)
    assert info.value.field == field


def test_config_must_be_an_object():
    with pytest.raises(ConfigurationError) as info:
        parse_config(["lln"])
    assert info.value.field == "config"


def test_overrides_replace_configured_values():
    cfg = parse_config({"experiment": "lln", "seed": 1, "threads": 2}, {"seed": 9, "threads": None})
    assert cfg.seed == 9
    assert cfg.threads == 2


def test_load_errors(tmp_path):
    with pytest.raises(ConfigurationError) as info:
        load_config(tmp_path / "missing.json")
    assert info.value.field == "config"
    broken = tmp_path / "broken.json"
    broken.write_text("{\"experiment\": ", encoding="utf-8")
    with pytest.raises(ConfigurationError, match="not valid JSON"):
        load_config(broken)


@pytest.mark.parametrize("path", EXPERIMENT_FILES, ids=lambda p: p.stem)
def test_shipped_experiments_parse(path):
    cfg = load_config(path)
    assert cfg.label
