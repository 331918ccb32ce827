"""Two-qubit depolarizing noise for linear-ramp QAOA and the overlap-decay analytics.

Only the ZZ phase gates of the cost layer are noisy; single-qubit Z phases and
the X mixer are applied ideally. After every ZZ gate on ``(i, j)`` the channel

    rho -> (1 - lam) rho + lam / 4 * Tr_ij(rho) (x) I_ij

is applied, either exactly on a density matrix or by Pauli unravelling: with
probability ``lam`` one of the 16 two-qubit Paulis (identity included) is drawn
uniformly and applied to a state vector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numba
import numpy as np

from .errors import CapacityError, ParameterError, UndefinedMetricError, UnsupportedModelError
from .ising import GroundTruth, IsingModel
from .metrics import SampleSet
from .schedule import LinearRampSchedule
from .simulator import STATE_CAP, _mixer_kernel

DENSITY_CAP = 10
TRAJECTORY_BLOCK = 1024
DEFAULT_MIN_POVL = 0.1  # overlaps below 10% are dominated by the late-time plateau


class Backend(str, enum.Enum):
    DENSITY_MATRIX = "density"
    TRAJECTORY = "trajectory"


@dataclass(frozen=True)
class NoiseConfig:
    lam: float
    backend: Backend = Backend.DENSITY_MATRIX
    trajectories: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError(f"depolarizing parameter must lie in [0, 1], got {self.lam}")
        if self.trajectories < 1:
            raise ParameterError("trajectories must be >= 1")
        object.__setattr__(self, "backend", Backend(self.backend))


class Gate(NamedTuple):
    qubits: tuple
    coeff: float

    @property
    def two_qubit(self) -> bool:
        return len(self.qubits) == 2


def decompose_cost_layer(model: IsingModel) -> list[Gate]:
    """Single-qubit Z phases (sorted by qubit) followed by ZZ phases sorted by ``(i, j)``."""
    if not model.is_quadratic:
        raise UnsupportedModelError("noisy simulation supports quadratic models only")
    gates = [Gate((i,), v) for i, v in sorted(model.linear.items())]
    gates += [Gate(k, v) for k, v in sorted(model.quadratic.items())]
    return gates


def two_qubit_gates_per_layer(model: IsingModel) -> int:
    return sum(g.two_qubit for g in decompose_cost_layer(model))


def total_two_qubit_gates(model: IsingModel, p: int) -> int:
    return two_qubit_gates_per_layer(model) * p


def _spins(n: int) -> np.ndarray:
    k = np.arange(1 << n)
    return 1.0 - 2.0 * ((k[None, :] >> np.arange(n)[:, None]) & 1)


def _gate_phases(gate: Gate, spins: np.ndarray, gamma: float) -> np.ndarray:
    z = spins[gate.qubits[0]].copy()
    for q in gate.qubits[1:]:
        z *= spins[q]
    return np.exp(-1j * gamma * gate.coeff * z)


@numba.njit(cache=True)
def _mixer_rows(mat, c, s, n):
    for r in range(mat.shape[0]):
        _mixer_kernel(mat[r], c, s, n)


# ---------------------------------------------------------------------------
# density matrix


def depolarize_pair(rho: np.ndarray, n: int, i: int, j: int, lam: float) -> None:
    """In-place two-qubit depolarizing channel on qubits ``i`` and ``j``."""
    if lam == 0.0:
        return
    t = rho.reshape((2,) * (2 * n))
    axes = [n - 1 - i, 2 * n - 1 - i, n - 1 - j, 2 * n - 1 - j]
    v = np.moveaxis(t, axes, [0, 1, 2, 3])
    reduced = v[0, 0, 0, 0] + v[0, 0, 1, 1] + v[1, 1, 0, 0] + v[1, 1, 1, 1]
    v *= 1.0 - lam
    for a in (0, 1):
        for b in (0, 1):
            v[a, a, b, b] += (lam / 4.0) * reduced


def _mix_density(rho: np.ndarray, beta: float, n: int) -> np.ndarray:
    # rho U^dagger acts on columns with exp(-i beta X); U symmetric
    c, s = math.cos(beta), math.sin(beta)
    _mixer_rows(rho, c, -s, n)
    rho_t = np.ascontiguousarray(rho.T)
    _mixer_rows(rho_t, c, s, n)
    return np.ascontiguousarray(rho_t.T)


def run_noisy_density(
    model: IsingModel, schedule: LinearRampSchedule, cfg: NoiseConfig | float,
    *, cap: int = DENSITY_CAP, return_rho: bool = False,
):
    """Exact density-matrix evolution; returns the computational-basis distribution."""
    lam = cfg.lam if isinstance(cfg, NoiseConfig) else float(cfg)
    n = model.num_vars
    if n > cap:
        raise CapacityError(f"density-matrix backend limited to {cap} qubits")
    gates = decompose_cost_layer(model)
    spins = _spins(n)
    dim = 1 << n
    rho = np.full((dim, dim), 1.0 / dim, dtype=np.complex128)
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        for g in gates:
            u = _gate_phases(g, spins, gamma)
            rho *= np.outer(u, u.conj())
            if g.two_qubit:
                depolarize_pair(rho, n, g.qubits[0], g.qubits[1], lam)
        rho = _mix_density(rho, beta, n)
    probs = np.clip(rho.diagonal().real.copy(), 0.0, None)
    if return_rho:
        return probs, rho
    return probs


# ---------------------------------------------------------------------------
# trajectories


def _apply_pauli(block: np.ndarray, rows: np.ndarray, qubit: int, code: int,
                 spins: np.ndarray, flip: np.ndarray) -> None:
    # code: 1 = X, 2 = Y, 3 = Z; Y = i X Z
    sub = block[rows]
    if code in (2, 3):
        sub = sub * spins[qubit]
    if code in (1, 2):
        sub = sub[:, flip[qubit]]
    if code == 2:
        sub = sub * 1j
    block[rows] = sub


def _run_block(model, schedule, lam, size, rng, gates, spins, flip):
    n = model.num_vars
    block = np.full((size, 1 << n), 2.0 ** (-n / 2), dtype=np.complex128)
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        for g in gates:
            block *= _gate_phases(g, spins, gamma)
            if not g.two_qubit or lam == 0.0:
                continue
            hit = np.flatnonzero(rng.random(size) < lam)
            if hit.size == 0:
                continue
            codes = rng.integers(0, 16, size=hit.size)
            for code in np.unique(codes):
                if code == 0:
                    continue
                rows = hit[codes == code]
                ci, cj = divmod(int(code), 4)
                if ci:
                    _apply_pauli(block, rows, g.qubits[0], ci, spins, flip)
                if cj:
                    _apply_pauli(block, rows, g.qubits[1], cj, spins, flip)
        _mixer_rows(block, math.cos(beta), math.sin(beta), n)
    return block


def _trajectory_blocks(model, schedule, cfg: NoiseConfig, cap: int):
    n = model.num_vars
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds the state-vector cap of {cap}")
    gates = decompose_cost_layer(model)
    spins = _spins(n)
    idx = np.arange(1 << n)
    flip = np.array([idx ^ (1 << q) for q in range(n)])
    remaining = cfg.trajectories
    b = 0
    while remaining > 0:
        size = min(TRAJECTORY_BLOCK, remaining)
        # block-indexed streams keep results independent of how blocks are scheduled
        rng = np.random.default_rng([cfg.seed, b])
        yield b, rng, _run_block(model, schedule, cfg.lam, size, rng, gates, spins, flip)
        remaining -= size
        b += 1


def trajectory_probabilities(model: IsingModel, schedule: LinearRampSchedule, cfg: NoiseConfig,
                             *, cap: int = STATE_CAP) -> np.ndarray:
    """Mean over trajectories of ``|psi|^2``: an unbiased estimate of ``diag(rho)``."""
    total = np.zeros(1 << model.num_vars)
    for _, _, block in _trajectory_blocks(model, schedule, cfg, cap):
        total += (np.abs(block) ** 2).sum(axis=0)
    return total / cfg.trajectories


def run_noisy_trajectory(model: IsingModel, schedule: LinearRampSchedule, cfg: NoiseConfig,
                         *, cap: int = STATE_CAP) -> SampleSet:
    """One measurement shot per trajectory."""
    n = model.num_vars
    shots = []
    for _, rng, block in _trajectory_blocks(model, schedule, cfg, cap):
        probs = np.abs(block) ** 2
        cdf = np.cumsum(probs, axis=1)
        u = rng.random(block.shape[0]) * cdf[:, -1]
        shots.append(np.minimum((cdf < u[:, None]).sum(axis=1), (1 << n) - 1))
    idx = np.concatenate(shots)
    uniq, counts = np.unique(idx, return_counts=True)
    return SampleSet.from_indices(uniq, counts, n, model,
                                  info={"trajectories": cfg.trajectories, "lambda": cfg.lam})


def noisy_probabilities(model, schedule, cfg: NoiseConfig) -> np.ndarray:
    if cfg.backend is Backend.DENSITY_MATRIX:
        return run_noisy_density(model, schedule, cfg)
    return trajectory_probabilities(model, schedule, cfg)


# ---------------------------------------------------------------------------
# analytics


def overlap_probability(p_qpu: float, p_ideal: float, p_random: float) -> float:
    """Noisy success probability rescaled so random guessing maps to 0 and ideal to 1."""
    den = p_ideal - p_random
    if den == 0:
        raise UndefinedMetricError("ideal and random success probabilities coincide")
    return (p_qpu - p_random) / den


@dataclass(frozen=True)
class NoiseFit:
    k0: float
    r_squared: float
    points: list = field(default_factory=list)  # (eps_acc, p_ovl)
    lambda_est: float | None = None

    def predict(self, eps_acc) -> np.ndarray:
        return 2.0 ** (-self.k0 * np.asarray(eps_acc, dtype=float))

    def to_dict(self) -> dict:
        return {"k0": self.k0, "r_squared": self.r_squared, "lambda_est": self.lambda_est,
                "points": [list(p) for p in self.points]}


def accumulated_error(n_gates, lam):
    return np.asarray(n_gates, dtype=float) * np.asarray(lam, dtype=float)


def fit_noise_model(points, *, min_povl: float = DEFAULT_MIN_POVL) -> NoiseFit:
    """Least squares of ``log2(p_ovl) = -k0 * N_g * lambda`` through the origin.

    ``points`` holds ``(N_g, lambda, p_ovl)`` triples; points with
    ``p_ovl <= min_povl`` are excluded. Deep in the noisy regime the overlap
    decays more slowly than exponentially (and is zero or negative once the
    state is close to maximally mixed), and those points would otherwise
    dominate a fit through the origin. Pass ``min_povl=0`` to use everything
    with positive overlap.
    """
    eps, povl = [], []
    for n_g, lam, p in points:
        if p > min_povl and p > 0:
            eps.append(float(n_g) * float(lam))
            povl.append(float(p))
    if len(eps) < 2:
        raise ParameterError("need at least two points with positive overlap")
    x = np.array(eps)
    y = np.log2(povl)
    sxx = float(x @ x)
    if sxx == 0:
        raise ParameterError("all accumulated errors are zero")
    k0 = -float(x @ y) / sxx
    resid = y + k0 * x
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(resid @ resid)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return NoiseFit(k0, r2, list(zip(eps, povl)))


def gate_budget(lam: float, target_povl: float, k0: float) -> float:
    """Number of two-qubit gates after which the predicted overlap falls to ``target_povl``."""
    if lam <= 0 or k0 <= 0:
        raise ParameterError("lambda and k0 must be positive")
    if not 0 < target_povl < 1:
        raise ParameterError("target overlap must lie in (0, 1)")
    return -math.log2(target_povl) / (k0 * lam)


def estimate_lambda(points, k0: float) -> float:
    """Least-squares ``lambda`` from ``(N_g, p_ovl)`` pairs at fixed ``k0``."""
    if k0 <= 0:
        raise ParameterError("k0 must be positive")
    ng = np.array([float(n) for n, p in points if p > 0])
    if ng.size == 0 or not np.any(ng > 0):
        raise ParameterError("need at least one point with N_g > 0 and positive overlap")
    y = np.log2([p for _, p in points if p > 0])
    return -float(ng @ y) / (k0 * float(ng @ ng))


def noise_sweep(model: IsingModel, truth: GroundTruth, delta_beta: float, delta_gamma: float,
                p_values, lambdas, *, backend=Backend.DENSITY_MATRIX, trajectories: int = 1000,
                seed: int = 0) -> list[dict]:
    """Rows ``(p, N_g, lambda, eps_acc, p_success, p_ideal, p_random, p_ovl)`` for a grid."""
    from .schedule import build_schedule
    from .simulator import run, success_probability

    rows = []
    p_random = truth.degeneracy / 2.0 ** truth.num_vars
    per_layer = two_qubit_gates_per_layer(model)
    for p in p_values:
        sched = build_schedule(delta_beta, delta_gamma, p)
        ideal, _ = run(model, sched)
        p_ideal = success_probability(ideal, truth)
        n_g = per_layer * p
        for lam in lambdas:
            cfg = NoiseConfig(lam, backend, trajectories, seed)
            probs = noisy_probabilities(model, sched, cfg)
            p_succ = float(probs[truth.optimal_indices].sum())
            try:
                povl = overlap_probability(p_succ, p_ideal, p_random)
            except UndefinedMetricError:
                povl = float("nan")
            rows.append({"p": p, "n_gates": n_g, "lambda": lam, "eps_acc": n_g * lam,
                         "p_success": p_succ, "p_ideal": p_ideal, "p_random": p_random,
                         "p_ovl": povl})
    return rows
