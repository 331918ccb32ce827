import json

import numpy as np
import pytest

from lrqaoa.errors import ParameterError
from lrqaoa.experiment import (
    CompareConfig,
    ExperimentConfig,
    best_cell,
    compare_solvers,
    content_hash,
    fit_exponent,
    heatmap_matrix,
    last_computed,
    read_csv,
    ridge_connected,
    run_experiment,
    scan_performance_diagram,
    summarize_comparison,
)
from lrqaoa.ising import brute_force
from lrqaoa.problems import generate
from lrqaoa.schedule import SCAN_MAX, delta_grid

SMALL_SCAN = {"scan": {"beta_range": [0.2, 0.8], "gamma_range": [0.2, 1.0], "steps": [3, 3]}}


def test_config_validation():
    with pytest.raises(ParameterError):
        ExperimentConfig(sizes=[])
    with pytest.raises(ParameterError):
        ExperimentConfig(delta_policy={})
    with pytest.raises(ParameterError):
        ExperimentConfig(delta_policy={"fixed": [0.3, 0.6], "scan": {}})
    with pytest.raises(ParameterError):
        ExperimentConfig.from_dict({"sizes": [6], "colour": "red"})
    with pytest.raises(ValueError):
        ExperimentConfig(family="tsp")
    cfg = ExperimentConfig(sizes=[6, 8])
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    assert len(ExperimentConfig(delta_policy={"scan": {}}).scan_grid()) == 42


def test_content_hash_is_order_independent():
    assert content_hash({"a": 1, "b": [1, 2]}) == content_hash({"b": [1, 2], "a": 1})
    assert content_hash({"a": 1}) != content_hash({"a": 2})


def test_single_point_gives_one_row(tmp_path):
    cfg = ExperimentConfig(sizes=[6], seeds=[3], p_values=[5])
    out = run_experiment(cfg, out=tmp_path)
    rows = read_csv(out / "runs.csv")
    assert len(rows) == 1
    assert rows[0]["n_qubits"] == "6" and rows[0]["p"] == "5" and rows[0]["seed"] == "3"
    assert last_computed(out) == 1
    assert json.loads((out / "scaling.json").read_text()) == {}


def test_resume_does_no_work_and_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(sizes=[6, 8], seeds=[0, 1, 2], p_values=[3, 6], delta_policy=SMALL_SCAN,
                           shots=200, mitigate=True)
    out = run_experiment(cfg, out=tmp_path)
    first = {f: (out / f).read_bytes() for f in ("runs.csv", "summary.csv", "scan.csv")}
    assert last_computed(out) == 2 * 2 + 2 * 2 * 3
    run_experiment(cfg, out=tmp_path)
    assert last_computed(out) == 0
    for f, blob in first.items():
        assert (out / f).read_bytes() == blob


def test_worker_count_does_not_change_outputs(tmp_path):
    cfg = ExperimentConfig(sizes=[6, 7], seeds=[0, 1, 2, 3], p_values=[4], delta_policy=SMALL_SCAN)
    a = run_experiment(cfg, out=tmp_path / "w1", workers=1)
    b = run_experiment(cfg, out=tmp_path / "w2", workers=2)
    for f in ("runs.csv", "summary.csv", "scan.csv", "scaling.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_aggregates_match_per_run_files(tmp_path):
    cfg = ExperimentConfig(sizes=[6, 8], seeds=list(range(5)), p_values=[4, 8])
    out = run_experiment(cfg, out=tmp_path)
    per_run = [json.loads(p.read_text())["value"] for p in (out / "runs").glob("*.json")]
    assert len(per_run) == 20
    for row in read_csv(out / "summary.csv"):
        vals = [r["success_prob"] for r in per_run
                if r["n_qubits"] == int(row["n"]) and r["p"] == int(row["p"])]
        assert float(row["median"]) == np.median(vals)
        assert float(row["q1"]) == np.quantile(vals, 0.25)
        assert float(row["q3"]) == np.quantile(vals, 0.75)
        assert int(row["count"]) == 5


def test_scan_reuses_seed0_best_cell(tmp_path):
    cfg = ExperimentConfig(sizes=[7], seeds=[0, 1], p_values=[5], delta_policy=SMALL_SCAN)
    out = run_experiment(cfg, out=tmp_path)
    inst = generate("wmaxcut", 7, 0)
    rows = scan_performance_diagram(inst.model, brute_force(inst.model), 5, cfg.scan_grid())
    best = best_cell(rows)
    for r in read_csv(out / "runs.csv"):
        assert float(r["delta_beta"]) == best["delta_beta"]
        assert float(r["delta_gamma"]) == best["delta_gamma"]


def test_zero_cell_is_uniform_baseline():
    inst = generate("wmaxcut", 8, 2)
    truth = brute_force(inst.model)
    rows = scan_performance_diagram(inst.model, truth, 20, delta_grid((0, 1), (0, 1), 3))
    zero = [r for r in rows if r["delta_beta"] == 0 and r["delta_gamma"] == 0][0]
    assert zero["prob"] == pytest.approx(truth.degeneracy / 256, abs=1e-12)


def test_heatmap_and_best_cell_ties():
    rows = [{"delta_beta": b, "delta_gamma": g, "prob": 0.5} for b in (0, 1) for g in (0, 1, 2)]
    assert best_cell(rows) is rows[0]
    betas, gammas, m = heatmap_matrix(rows)
    assert m.shape == (2, 3) and np.all(m == 0.5)


def test_ridge_connected_logic():
    def grid(mask):
        return [{"delta_beta": i, "delta_gamma": j, "prob": float(mask[i][j])}
                for i in range(len(mask)) for j in range(len(mask[0]))]
    assert ridge_connected(grid([[1, 1, 0], [0, 1, 1]]), 0.5)
    assert not ridge_connected(grid([[1, 0, 0], [0, 0, 1]]), 0.5)
    assert not ridge_connected(grid([[0, 0], [0, 0]]), 0.5)


def test_ridge_region_on_10_qubit_instance():
    inst = generate("wmaxcut", 10, 0)
    truth = brute_force(inst.model)
    rows = scan_performance_diagram(inst.model, truth, 50, delta_grid((0, SCAN_MAX), (0, SCAN_MAX), 10))
    base = truth.degeneracy / 1024
    assert max(r["prob"] for r in rows) >= 10 * base
    assert ridge_connected(rows, 10 * base)


def _best_cells():
    grid = delta_grid((0, SCAN_MAX), (0, SCAN_MAX), 10)
    cells = []
    for seed in range(10):
        inst = generate("wmaxcut", 10, seed)
        cells.append(best_cell(scan_performance_diagram(inst.model, brute_force(inst.model), 50, grid)))
    return cells


@pytest.fixture(scope="module")
def best_cells():
    return _best_cells()


def test_best_delta_beta_small_on_majority(best_cells):
    assert sum(c["delta_beta"] <= 0.6 for c in best_cells) > 5


@pytest.mark.xfail(strict=True, reason="at ten qubits the best delta_gamma sits near 0.8-1.0")
def test_best_cell_both_deltas_small_on_majority(best_cells):
    assert sum(c["delta_beta"] <= 0.6 and c["delta_gamma"] <= 0.6 for c in best_cells) > 5


def test_fit_exponent_recovers_synthetic():
    sizes = [10, 12, 14, 16, 18]
    tts = [3.7 * 2.0 ** (0.19 * n) for n in sizes]
    slope, intercept = fit_exponent(sizes, tts)
    assert abs(slope - 0.19) < 1e-9
    assert abs(intercept - np.log2(3.7)) < 1e-9
    slope, _ = fit_exponent(sizes + [20], tts + [float("inf")])
    assert abs(slope - 0.19) < 1e-9
    assert np.isnan(fit_exponent([10], [1.0])[0])


def test_summarize_comparison_synthetic():
    rows = []
    for n in (10, 12, 14, 16):
        for i in range(5):
            jitter = 2.0 ** (0.1 * (i - 2))
            rows.append({"solver": "sa", "n": n, "instance": i, "tts": 2.0 ** (0.19 * n) * jitter})
            rows.append({"solver": "lrqaoa", "n": n, "instance": i, "tts": 2.0 ** (0.11 * n) * jitter})
        rows.append({"solver": "_pcc", "n": n, "instance": -1, "success_prob": 0.4, "tts": np.nan})
    rep = summarize_comparison(rows)
    assert abs(rep["solvers"]["sa"]["exponent"] - 0.19) < 1e-9
    assert abs(rep["solvers"]["lrqaoa"]["exponent"] - 0.11) < 1e-9
    assert rep["pcc"] == {"10": 0.4, "12": 0.4, "14": 0.4, "16": 0.4}
    assert rep["solvers"]["sa"]["per_size"]["10"]["count"] == 5


def test_compare_solvers_small(tmp_path):
    cfg = CompareConfig(sizes=[6, 8], instances=6, hard=3, sweeps=50, reads=20)
    ext = [{"solver": "cplex", "n": 6, "tts": 1.0}, {"solver": "cplex", "n": 8, "tts": 4.0}]
    rep = compare_solvers(cfg, out=tmp_path, external=ext)
    assert set(rep["solvers"]) == {"sa", "tabu", "lrqaoa", "cplex"}
    assert rep["solvers"]["cplex"]["exponent"] == pytest.approx(1.0)
    for s in ("sa", "tabu", "lrqaoa"):
        for stats in rep["solvers"][s]["per_size"].values():
            assert stats["count"] == 3
    for v in rep["pcc"].values():
        assert np.isnan(v) or -1 <= v <= 1
    rows = read_csv(tmp_path / "compare_runs.csv")
    assert all(np.isfinite(float(r["tts"])) for r in rows if r["solver"] in ("sa", "tabu", "lrqaoa"))
