"""Experiment runner: handlers, threshold overrides, dumps and density tables."""

import numpy as np
import pytest

from config import DUMP_LIMIT
from evals.runner import ExperimentRunner, density_frame, dump_density, list_experiments, output_paths
from utils.errors import CapabilityError, ConfigurationError
from utils.experiment_config import ExperimentKind, GridConfig, load_config, parse_config
from utils.reports import REPORT_KEYS

SIMPLE = {"family": "lattice_pmf", "params": {"pmf": [["1", "1/2"], ["-1", "1/2"]]}}
LAPLACE = {"family": "laplace_unit"}
FOUR_STATE = {
    "states": ["a", "b", "c", "d"],
    "P": [[0.1, 0.4, 0.3, 0.2], [0.5, 0.0, 0.25, 0.25], [0.2, 0.2, 0.2, 0.4], [0.0, 0.6, 0.4, 0.0]],
    "A": [0, 2],
}


def run(data):
    return ExperimentRunner(parse_config(data)).run()


def test_catalog_covers_every_kind():
    kinds = [row["experiment"] for row in list_experiments()]
    assert sorted(kinds) == sorted(k.value for k in ExperimentKind)
    assert all(row["claim"] for row in list_experiments())


def test_first_moment_report():
    outcome = run({"experiment": "first_moment", "law": LAPLACE})
    assert outcome.passed
    assert set(REPORT_KEYS) <= set(outcome.report)
    assert [v["name"] for v in outcome.report["verdicts"]] == ["first_moment.integral_forms",
                                                               "first_moment.direct"]
    assert outcome.report["routes"]["moment_formula"] == pytest.approx(1.0)


def test_threshold_overrides_are_keyed_by_statistic():
    outcome = run({"experiment": "first_moment", "law": LAPLACE, "thresholds": {"relative_error": 0.5}})
    assert all(v["threshold"] == 0.5 for v in outcome.report["verdicts"])


@pytest.mark.parametrize("kind", ["finite_chain", "kac", "duality", "bijection", "product_reduction"])
def test_finite_chain_experiments(kind):
    outcome = run({"experiment": kind, "chain_data": FOUR_STATE})
    assert outcome.passed, outcome.failed
    assert all(v["statistic"] == "residual" for v in outcome.report["verdicts"])


def test_shipped_kac_and_torus_experiments(experiments_dir):
    for name in ("kac_example", "torus_2d"):
        outcome = ExperimentRunner(load_config(experiments_dir / f"{name}.json")).run()
        assert outcome.passed, (name, outcome.failed)


def test_finite_suite_experiment():
    outcome = run({"experiment": "finite_suite", "threads": 2,
                   "suite": {"count": 4, "min_states": 3, "max_states": 6}})
    assert outcome.passed, outcome.failed
    assert len(outcome.frames["suite"]) == 4
    assert outcome.report["suite"]["chains"] == 4
    assert outcome.report["verdicts"][-1]["name"] == "chains_failed"


def test_reducible_chain_is_skipped_not_failed():
    chain = {"P": [[0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5], [0, 0, 0.5, 0.5]], "A": [0]}
    outcome = run({"experiment": "kac", "chain_data": chain})
    verdict = outcome.report["verdicts"][0]
    assert verdict["statistic"] == "skipped" and not verdict["asserted"]
    assert outcome.passed


@pytest.mark.parametrize("data, field", [
    ({"experiment": "hopf", "law": LAPLACE}, "A"),
    ({"experiment": "lln"}, "law"),
    ({"experiment": "kac"}, "chain_file"),
    ({"experiment": "kac", "chain_data": {"P": [[0.5, 0.5], [0.5, 0.5]]}}, "chain.A"),
    ({"experiment": "torus"}, "torus"),
    ({"experiment": "occupation", "law": SIMPLE, "B": {"kind": "box", "lower": [0], "upper": [1]},
      "variants": ["sideways"]}, "variants"),
    ({"experiment": "finite_suite", "suite": {"min_states": 8, "max_states": 4}}, "suite.max_states"),
])
def test_missing_inputs_are_configuration_errors(data, field):
    with pytest.raises(ConfigurationError) as info:
        run(data)
    assert info.value.field == field


def test_chain_file_errors(tmp_path):
    with pytest.raises(ConfigurationError) as info:
        run({"experiment": "kac", "chain_file": str(tmp_path / "absent.json")})
    assert info.value.field == "chain_file"


def test_capability_errors_surface_before_sampling(drifting_lattice):
    drift = {"family": "lattice_pmf", "params": {"pmf": [["1", "1/2"], ["0", "1/4"], ["-1", "1/4"]]}}
    with pytest.raises(CapabilityError):
        run({"experiment": "lln", "law": drift, "n_crossings": 10})


def test_lln_dump_frames():
    outcome = run({"experiment": "lln", "law": SIMPLE, "n_crossings": 100, "replicas": 2, "threads": 2,
                   "output": {"dump": True}})
    assert outcome.passed
    path, events = outcome.frames["path"], outcome.frames["events"]
    assert len(path) == DUMP_LIMIT
    assert list(path.columns) == ["k", "S_k"]
    assert path["S_k"].iloc[0] == 0.0
    assert list(events.columns) == ["n", "T_n", "U_n", "O_n", "dir"]
    assert len(events) > 0
    assert set(events["dir"]) <= {"up", "down"}


def test_hopf_dump_frames():
    outcome = run({"experiment": "hopf", "law": LAPLACE, "A": {"kind": "half_line_nonneg"},
                   "B1": {"kind": "box", "lower": [0], "upper": [1]},
                   "B2": {"kind": "box", "lower": [1], "upper": [2]},
                   "n_events": 400, "replicas": 4, "threads": 2, "output": {"dump": True}})
    entrances = outcome.frames["entrances"]
    assert list(entrances.columns) == ["n", "T_n", "exit", "entrance"]
    assert (entrances["entrance"] >= 0).all() and (entrances["exit"] < 0).all()


def test_ecdf_frames_are_collected():
    outcome = run({"experiment": "clt", "law": LAPLACE, "n": 200, "M": 200, "replicas": 2, "threads": 2})
    assert "ecdf_0" in outcome.frames


def test_density_tables(tmp_path):
    cfg = parse_config({"experiment": "first_moment", "law": SIMPLE, "density": "pi",
                        "grid": {"start": -2.5, "stop": 2.5, "num": 7}})
    frame = dump_density(cfg)
    assert frame["x"].tolist() == [-2.0, -1.0, 0.0, 1.0, 2.0]
    np.testing.assert_allclose(frame["density"], [0.0, 0.5, 0.5, 0.0, 0.0])

    continuum = parse_config({"experiment": "first_moment", "law": LAPLACE, "density": "pi_plus",
                              "grid": {"start": 0, "stop": 1, "num": 3}})
    np.testing.assert_allclose(dump_density(continuum)["density"], np.exp(-np.array([0.0, 0.5, 1.0])))

    with pytest.raises(ConfigurationError) as info:
        dump_density(parse_config({"experiment": "first_moment", "law": LAPLACE, "density": "entrance"}))
    assert info.value.field == "A"
    with pytest.raises(ConfigurationError):
        dump_density(parse_config({"experiment": "first_moment", "law": LAPLACE}))


def test_density_grid_must_be_ordered(laplace):
    from closed_form.densities import pi_density

    with pytest.raises(ConfigurationError):
        density_frame(pi_density(laplace), GridConfig(start=1.0, stop=0.0))


def test_output_paths(tmp_path):
    cfg = parse_config({"experiment": "lln", "name": "run1", "output": {"dir": str(tmp_path)}})
    paths = output_paths(cfg, {"path": None, "events": None})
    assert paths["path"] == tmp_path / "run1_path.csv"


@pytest.mark.parametrize("data", [
    {"experiment": "lln", "law": LAPLACE, "n_crossings": 400, "starts": [0.0, 1.5], "max_steps": 10**7},
    {"experiment": "occupation", "law": SIMPLE, "B": {"kind": "box", "lower": [-1], "upper": [1]},
     "N_cycles": 800, "variants": ["plus", "mixture"], "max_steps": 10**5},
    {"experiment": "hopf", "law": LAPLACE, "A": {"kind": "half_line_nonneg"},
     "B1": {"kind": "box", "lower": [0], "upper": [1]}, "B2": {"kind": "box", "lower": [1], "upper": [2]},
     "n_events": 400, "max_steps": 10**8},
], ids=lambda d: d["experiment"])
def test_reports_do_not_depend_on_threads(data):
    def report(threads):
        outcome = run({**data, "seed": 77, "replicas": 6, "threads": threads})
        return {k: v for k, v in outcome.report.items() if k not in ("runtime_ms", "threads")}

    assert report(1) == report(4)
