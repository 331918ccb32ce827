import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrqaoa.errors import CapacityError, ParameterError, UndefinedMetricError, UnsupportedModelError
from lrqaoa.ising import IsingModel, brute_force
from lrqaoa.noise import (
    Backend,
    NoiseConfig,
    decompose_cost_layer,
    estimate_lambda,
    fit_noise_model,
    gate_budget,
    noise_sweep,
    overlap_probability,
    run_noisy_density,
    run_noisy_trajectory,
    total_two_qubit_gates,
    trajectory_probabilities,
    two_qubit_gates_per_layer,
)
from lrqaoa.problems import gen_fc_wmaxcut, gen_mis, generate, model_from_edges
from lrqaoa.schedule import build_schedule
from lrqaoa.simulator import run

from oracles import dense_noisy_qaoa, linear_ramp


def test_gate_counts():
    assert two_qubit_gates_per_layer(gen_fc_wmaxcut(5, seed=0, normalization=False).model) == 10
    path = model_from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    assert two_qubit_gates_per_layer(path) == 3
    assert total_two_qubit_gates(path, 7) == 21
    for n in (3, 6, 9):
        inst = gen_fc_wmaxcut(n, seed=1)
        nonzero = sum(1 for *_, w in inst.edges if w != 0)
        assert two_qubit_gates_per_layer(inst.model) == nonzero == n * (n - 1) // 2


def test_decomposition_order_and_cubic():
    m = IsingModel(3, {2: 1.0, 0: 0.5}, {(1, 2): 1.0, (0, 2): 2.0})
    gates = decompose_cost_layer(m)
    assert [g.qubits for g in gates] == [(0,), (2,), (0, 2), (1, 2)]
    with pytest.raises(UnsupportedModelError):
        decompose_cost_layer(generate("max3sat", 4, 0).model)
    with pytest.raises(UnsupportedModelError):
        run_noisy_density(generate("max3sat", 4, 0).model, build_schedule(0.3, 0.6, 2), 0.1)


def test_config_validation():
    with pytest.raises(ParameterError):
        NoiseConfig(1.5)
    with pytest.raises(ParameterError):
        NoiseConfig(0.1, trajectories=0)
    assert NoiseConfig(0.1, "trajectory").backend is Backend.TRAJECTORY


def test_density_lambda_zero_matches_noiseless():
    m = generate("wmaxcut", 6, 3).model
    sched = build_schedule(0.3, 0.6, 10)
    state, _ = run(m, sched)
    np.testing.assert_allclose(run_noisy_density(m, sched, 0.0), state.probabilities(), atol=1e-9)


@pytest.mark.parametrize("lam", [0.03, 0.3, 1.0])
@pytest.mark.parametrize("model_kind", ["wmaxcut", "mis"])
def test_density_matches_kraus_oracle(lam, model_kind):
    m = generate(model_kind, 4, 5).model
    b, g = linear_ramp(0.4, 0.7, 3)
    probs = run_noisy_density(m, build_schedule(0.4, 0.7, 3), lam)
    np.testing.assert_allclose(probs, dense_noisy_qaoa(m, b, g, lam), atol=1e-12)


def test_lambda_one_maximally_mixed():
    m = gen_fc_wmaxcut(5, seed=2).model
    probs = run_noisy_density(m, build_schedule(0.3, 0.6, 3), 1.0)
    np.testing.assert_allclose(probs, 1 / 32, atol=1e-9)


def test_trace_and_positivity():
    rng = np.random.default_rng(0)
    for seed in range(3):
        m = generate("wmaxcut", 4, seed).model
        lam = float(rng.uniform(0.01, 0.5))
        for p in (1, 4, 9):
            _, rho = run_noisy_density(m, build_schedule(0.5, 0.9, p), lam, return_rho=True)
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
            np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
            assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_density_cap():
    with pytest.raises(CapacityError):
        run_noisy_density(generate("wmaxcut", 11, 0).model, build_schedule(0.3, 0.6, 1), 0.1)


def test_trajectory_lambda_zero_is_noiseless():
    m = generate("wmaxcut", 5, 1).model
    sched = build_schedule(0.3, 0.6, 6)
    state, _ = run(m, sched)
    probs = trajectory_probabilities(m, sched, NoiseConfig(0.0, "trajectory", 3))
    np.testing.assert_allclose(probs, state.probabilities(), atol=1e-12)


def test_trajectory_unbiased_vs_kraus_oracle():
    m = generate("wmaxcut", 4, 0).model
    b, g = linear_ramp(0.4, 0.7, 3)
    exact = dense_noisy_qaoa(m, b, g, 0.3)
    cfg = NoiseConfig(0.3, "trajectory", 20_000, seed=4)
    est = trajectory_probabilities(m, build_schedule(0.4, 0.7, 3), cfg)
    # |psi|^2 per trajectory is bounded by 1, so 5/sqrt(N) is a loose ceiling
    assert np.max(np.abs(est - exact)) < 5 / math.sqrt(cfg.trajectories)


def test_trajectory_determinism_and_sampleset():
    m = generate("wmaxcut", 5, 0).model
    sched = build_schedule(0.3, 0.6, 4)
    cfg = NoiseConfig(0.05, "trajectory", 1500, seed=11)
    a = run_noisy_trajectory(m, sched, cfg)
    b = run_noisy_trajectory(m, sched, cfg)
    assert a.total_shots == 1500
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.counts, b.counts)
    np.testing.assert_array_equal(trajectory_probabilities(m, sched, cfg),
                                  trajectory_probabilities(m, sched, cfg))


def test_overlap_examples():
    assert overlap_probability(0.5, 0.5, 0.01) == 1.0
    assert overlap_probability(0.01, 0.5, 0.01) == 0.0
    assert overlap_probability(0.05, 0.5, 0.01) == pytest.approx(0.04 / 0.49)
    with pytest.raises(UndefinedMetricError):
        overlap_probability(0.1, 0.2, 0.2)


def test_fit_examples():
    fit = fit_noise_model([(1, 1.0, 0.5), (2, 1.0, 0.25)])
    assert fit.k0 == pytest.approx(1.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        fit_noise_model([(1, 1.0, 0.5)])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 4.0), st.lists(st.integers(1, 400), min_size=2, max_size=12, unique=True))
def test_fit_recovers_synthetic_k0(k0, n_gates):
    lam = 1e-3
    pts = [(g, lam, 2.0 ** (-k0 * g * lam)) for g in n_gates]
    fit = fit_noise_model(pts, min_povl=0)
    assert abs(fit.k0 - k0) < 1e-9
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_recovers_1_82():
    pts = [(g, lam, 2.0 ** (-1.82 * g * lam)) for g in (50, 100, 200) for lam in (1e-4, 1e-3, 1e-2)]
    fit = fit_noise_model(pts)
    assert abs(fit.k0 - 1.82) < 1e-9 and fit.r_squared == pytest.approx(1.0)


def test_gate_budget():
    assert gate_budget(25e-4, 0.1, 1.82) == pytest.approx(730, rel=0.01)
    assert gate_budget(2.5e-4, 0.1, 1.82) == pytest.approx(7303, rel=0.01)
    assert gate_budget(1.0, 0.5, 1.0) == pytest.approx(1.0)
    for bad in ((0, 0.1, 1.0), (1e-3, 1.0, 1.0), (1e-3, 0.1, -1)):
        with pytest.raises(ParameterError):
            gate_budget(*bad)


def test_estimate_lambda():
    pts = [(g, 2.0 ** (-1.82 * g * 25e-4)) for g in (10, 100, 300, 700)]
    assert abs(estimate_lambda(pts, 1.82) - 25e-4) < 1e-9
    assert estimate_lambda([(200, 0.5)], 1.0) == pytest.approx(1 / 200)


def test_povl_decreases_with_lambda():
    inst = gen_mis(5, 0.5, 1)
    truth = brute_force(inst.model)
    rows = noise_sweep(inst.model, truth, 0.3, 0.6, [8], [1e-4, 1e-3, 1e-2, 1e-1, 0.5])
    povl = [r["p_ovl"] for r in rows]
    assert all(a >= b for a, b in zip(povl, povl[1:]))
    assert rows[0]["n_gates"] == two_qubit_gates_per_layer(inst.model) * 8
    assert rows[2]["eps_acc"] == pytest.approx(rows[2]["n_gates"] * 1e-2)


def test_trajectory_backend_in_sweep_matches_density_within_error():
    inst = generate("wmaxcut", 5, 2)
    truth = brute_force(inst.model)
    dens = noise_sweep(inst.model, truth, 0.3, 0.6, [6], [0.02])[0]["p_success"]
    traj = noise_sweep(inst.model, truth, 0.3, 0.6, [6], [0.02], backend="trajectory",
                       trajectories=4000, seed=1)[0]["p_success"]
    assert abs(dens - traj) < 5 * math.sqrt(dens * (1 - dens) / 4000) + 1e-3
