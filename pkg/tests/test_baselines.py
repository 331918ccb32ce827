import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrqaoa.baselines import (
    DEFAULT_SWEEPS,
    AnnealConfig,
    TabuConfig,
    beta_schedule,
    default_tenure,
    lr_qaoa_sample_time,
    lr_qaoa_tts,
    pearson,
    run_solver,
    select_hard_instances,
    simulated_annealing,
    tabu_search,
    tts,
)
from lrqaoa.errors import ParameterError
from lrqaoa.ising import IsingModel, brute_force
from lrqaoa.problems import gen_fc_wmaxcut, generate

from oracles import tts_reference

EDGE = IsingModel(2, {}, {(0, 1): 1.0})


def test_config_validation():
    with pytest.raises(ParameterError):
        AnnealConfig(sweeps=0)
    with pytest.raises(ParameterError):
        AnnealConfig(beta_range=(1.0, 0.5))
    with pytest.raises(ParameterError):
        TabuConfig(tenure=0)
    assert DEFAULT_SWEEPS == (50, 100, 200, 500)


def test_beta_schedule_geometric_and_linear():
    b = beta_schedule(AnnealConfig(sweeps=5, beta_range=(0.1, 10.0)), EDGE)
    np.testing.assert_allclose(b, [0.1, 0.1 * 10**0.5, 1.0, 10**0.5, 10.0])
    lin = beta_schedule(AnnealConfig(sweeps=3, beta_range=(1.0, 3.0), beta_schedule="linear"), EDGE)
    np.testing.assert_allclose(lin, [1.0, 2.0, 3.0])
    auto = beta_schedule(AnnealConfig(sweeps=4), EDGE)
    # single-edge model: every flip changes the energy by 2
    assert auto[0] == pytest.approx(0.05) and auto[-1] == pytest.approx(5.0)


def test_sa_single_edge():
    samples = simulated_annealing(EDGE, AnnealConfig(sweeps=100, reads=100, seed=1))
    assert np.mean(samples.energies == -1.0) >= 0.99
    assert samples.total_shots == 100 and len(samples.info["read_seconds"]) == 100


def test_tabu_single_edge():
    samples = tabu_search(EDGE, TabuConfig(iterations=2, reads=20, seed=0))
    assert np.all(samples.energies == -1.0)


@pytest.mark.parametrize("solver", [simulated_annealing, tabu_search])
def test_determinism(solver):
    m = gen_fc_wmaxcut(10, seed=3).model
    cfg = AnnealConfig(sweeps=50, reads=20, seed=5) if solver is simulated_annealing else \
        TabuConfig(iterations=100, reads=20, seed=5)
    a, b = solver(m, cfg), solver(m, cfg)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.energies, b.energies)


@pytest.mark.parametrize("seed", range(6))
def test_never_below_optimum_and_cubic_support(seed):
    fam = "max3sat" if seed % 2 else "wmaxcut"
    m = generate(fam, 10, seed).model
    opt = brute_force(m).optimal_energy
    for s in (simulated_annealing(m, AnnealConfig(sweeps=50, reads=10, seed=seed)),
              tabu_search(m, TabuConfig(reads=10, seed=seed))):
        assert s.energies.min() >= opt - 1e-9


def test_sa_finds_optimum_on_easy_n16():
    found = 0
    for seed in range(4):
        inst = gen_fc_wmaxcut(16, seed=seed)
        opt = brute_force(inst.model).optimal_energy
        s = simulated_annealing(inst.model, AnnealConfig(sweeps=500, reads=30, seed=seed))
        found += s.energies.min() <= opt + 1e-9
    assert found >= 1


def test_tabu_competitive_with_sa_n14():
    wins = 0
    for seed in range(50):
        m = gen_fc_wmaxcut(14, seed=seed).model
        sa = simulated_annealing(m, AnnealConfig(sweeps=200, reads=20, seed=seed))
        tb = tabu_search(m, TabuConfig(reads=20, seed=seed))
        wins += tb.energies.min() <= sa.energies.min() + 1e-12
    assert wins >= 20


def test_sa_median_best_improves_with_sweeps():
    lo, hi = [], []
    for seed in range(30):
        m = gen_fc_wmaxcut(12, seed=seed).model
        lo.append(simulated_annealing(m, AnnealConfig(sweeps=5, reads=5, seed=seed)).energies.min())
        hi.append(simulated_annealing(m, AnnealConfig(sweeps=200, reads=5, seed=seed)).energies.min())
    assert np.median(hi) <= np.median(lo)


def test_default_tenure():
    assert default_tenure(12) == 10
    assert default_tenure(100) == 25
    assert default_tenure(4) == 3


def test_tts_examples():
    assert tts(0.5, 1.0, 0.99) == pytest.approx(6.6439, abs=1e-3)
    assert tts(0.99, 1.0, 0.99) == pytest.approx(1.0)
    assert tts(1.0, 2.0) == 2.0
    assert math.isinf(tts(0.0, 1.0))
    assert lr_qaoa_sample_time(20, 100) == pytest.approx(1.05e-5)
    assert lr_qaoa_tts(0.5, 20, 100) == pytest.approx(6.976e-5, rel=1e-3)
    assert lr_qaoa_tts(1.0, 20, 100) == pytest.approx(1.05e-5)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-6, 0.999), st.floats(1e-6, 0.999), st.floats(1e-9, 1e3))
def test_tts_strictly_decreasing(p1, p2, T):
    if abs(p1 - p2) < 1e-9:
        return
    lo, hi = sorted((p1, p2))
    assert tts(lo, T) > tts(hi, T)
    # the plain-log oracle loses about eps/p relative accuracy near p = 0
    assert tts(lo, T) == pytest.approx(tts_reference(lo, T), rel=1e-8)


def test_pearson():
    assert pearson([1, 2, 3, 4], [2, 4, 6, 8]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert math.isnan(pearson([1, 1, 1], [1, 2, 3]))


def test_select_hard_instances():
    models = [gen_fc_wmaxcut(8, seed=s).model for s in range(6)]
    truths = [brute_force(m) for m in models]
    cfg = AnnealConfig(sweeps=10, reads=20, seed=0)
    sel = select_hard_instances(models, truths, cfg, 3)
    assert len(sel.selected) == 3 and sel.selected == sorted(sel.selected)
    hardest = sorted(range(6), key=lambda i: (-sel.sa_tts[i], i))[:3]
    assert sorted(hardest) == sel.selected
    assert math.isnan(sel.pcc) or -1 <= sel.pcc <= 1
    full = select_hard_instances(models, truths, cfg, 6)
    assert full.selected == list(range(6))
    with pytest.raises(ParameterError):
        select_hard_instances(models, truths, cfg, 7)


def test_run_solver_report():
    m = gen_fc_wmaxcut(8, seed=1).model
    rep = run_solver("tabu", m, brute_force(m), TabuConfig(reads=10))
    assert rep.success_prob == 1.0
    assert rep.tts_work() == rep.work_per_read
    with pytest.raises(ParameterError):
        run_solver("cplex", m, None, None)
