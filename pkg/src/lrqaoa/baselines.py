"""Classical reference solvers (simulated annealing, tabu search) and time-to-solution."""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ParameterError
from .ising import GroundTruth, IsingModel, degeneracy_tolerance, energies
from .metrics import SampleSet

DEFAULT_SWEEPS = (50, 100, 200, 500)
DEFAULT_PD = 0.99
DEFAULT_T2Q = 2.5e-9


class BetaSchedule(str, enum.Enum):
    GEOMETRIC = "geometric"
    LINEAR = "linear"


@dataclass(frozen=True)
class AnnealConfig:
    sweeps: int = 200
    reads: int = 100
    beta_schedule: BetaSchedule = BetaSchedule.GEOMETRIC
    beta_range: tuple | None = None  # None: derived from the model's flip-energy scale
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1 or self.reads < 1:
            raise ParameterError("sweeps and reads must be >= 1")
        if self.beta_range is not None:
            lo, hi = self.beta_range
            if not 0 < lo < hi:
                raise ParameterError("beta_range must satisfy 0 < beta_min < beta_max")
        object.__setattr__(self, "beta_schedule", BetaSchedule(self.beta_schedule))


@dataclass(frozen=True)
class TabuConfig:
    iterations: int | None = None  # None: 50 * n
    tenure: int | None = None  # None: max(10, n // 4), capped at n - 1
    reads: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.tenure is not None and self.tenure < 1:
            raise ParameterError("tabu tenure must be >= 1")
        if self.iterations is not None and self.iterations < 1:
            raise ParameterError("iterations must be >= 1")
        if self.reads < 1:
            raise ParameterError("reads must be >= 1")


# ---------------------------------------------------------------------------
# kernels operate on spins (+1/-1) with a dense J and a per-variable cubic list


def _model_arrays(model: IsingModel):
    n = model.num_vars
    h = model.linear_array()
    J = model.coupling_matrix()
    rows: list[list] = [[] for _ in range(n)]
    for (i, j, k), v in model.cubic.items():
        rows[i].append((j, k, v))
        rows[j].append((i, k, v))
        rows[k].append((i, j, v))
    ptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        ptr[i + 1] = ptr[i] + len(rows[i])
    flat = [t for r in rows for t in r]
    ca = np.array([t[0] for t in flat], dtype=np.int64)
    cb = np.array([t[1] for t in flat], dtype=np.int64)
    cv = np.array([t[2] for t in flat], dtype=np.float64)
    return h, J, ptr, ca, cb, cv


@numba.njit(cache=True)
def _field(i, s, h, J, ptr, ca, cb, cv):
    f = h[i]
    for j in range(s.shape[0]):
        f += J[i, j] * s[j]
    for t in range(ptr[i], ptr[i + 1]):
        f += cv[t] * s[ca[t]] * s[cb[t]]
    return f


@numba.njit(cache=True)
def _anneal_kernel(s, betas, uniforms, h, J, ptr, ca, cb, cv):
    n = s.shape[0]
    for sweep in range(betas.shape[0]):
        beta = betas[sweep]
        for i in range(n):
            de = -2.0 * s[i] * _field(i, s, h, J, ptr, ca, cb, cv)
            if de <= 0.0 or uniforms[sweep, i] < math.exp(-beta * de):
                s[i] = -s[i]
    return s


@numba.njit(cache=True)
def _tabu_kernel(s, iterations, tenure, h, J, ptr, ca, cb, cv, e0):
    n = s.shape[0]
    tabu_until = np.zeros(n, dtype=np.int64)
    best = s.copy()
    e = e0
    best_e = e0
    de = np.empty(n)
    for it in range(iterations):
        for i in range(n):
            de[i] = -2.0 * s[i] * _field(i, s, h, J, ptr, ca, cb, cv)
        move = -1
        move_de = np.inf
        for i in range(n):
            allowed = tabu_until[i] <= it or e + de[i] < best_e - 1e-12
            if allowed and de[i] < move_de:
                move_de = de[i]
                move = i
        if move < 0:
            continue
        s[move] = -s[move]
        e += move_de
        tabu_until[move] = it + 1 + tenure
        if e < best_e - 1e-12:
            best_e = e
            best[:] = s
    return best


def _spins_to_bits(s: np.ndarray) -> np.ndarray:
    return ((1 - s) // 2).astype(np.uint8)


_warm = False


def _warmup() -> None:
    global _warm
    if _warm:
        return
    m = IsingModel(3, {0: 1.0}, {(0, 1): 1.0}, {(0, 1, 2): 1.0})
    arrs = _model_arrays(m)
    _anneal_kernel(np.ones(3), np.ones(1), np.zeros((1, 3)), *arrs)
    _tabu_kernel(np.ones(3), 1, 1, *arrs, 0.0)
    _warm = True


def flip_energy_scale(model: IsingModel, rng: np.random.Generator) -> float:
    """Largest single-flip ``|dE|`` at a random state."""
    s = rng.integers(0, 2, size=model.num_vars).astype(np.float64) * 2 - 1
    arrs = _model_arrays(model)
    scale = max(abs(2.0 * _field(i, s, *arrs)) for i in range(model.num_vars))
    return scale if scale > 0 else 1.0


def beta_schedule(cfg: AnnealConfig, model: IsingModel) -> np.ndarray:
    if cfg.beta_range is None:
        scale = flip_energy_scale(model, np.random.default_rng([cfg.seed, 2**31]))
        lo, hi = 0.1 / scale, 10.0 / scale
    else:
        lo, hi = cfg.beta_range
    if cfg.sweeps == 1:
        return np.array([hi])
    if cfg.beta_schedule is BetaSchedule.GEOMETRIC:
        return np.geomspace(lo, hi, cfg.sweeps)
    return np.linspace(lo, hi, cfg.sweeps)


def _read_seeds(seed: int, reads: int):
    return np.random.SeedSequence(seed).spawn(reads)


def simulated_annealing(model: IsingModel, cfg: AnnealConfig = AnnealConfig()) -> SampleSet:
    """Single-spin Metropolis sweeps in fixed variable order; one final sample per read."""
    _warmup()
    n = model.num_vars
    arrs = _model_arrays(model)
    betas = beta_schedule(cfg, model)
    states = np.empty((cfg.reads, n), dtype=np.uint8)
    seconds = np.empty(cfg.reads)
    for r, ss in enumerate(_read_seeds(cfg.seed, cfg.reads)):
        t0 = time.perf_counter()
        rng = np.random.default_rng(ss)
        s = rng.integers(0, 2, size=n).astype(np.float64) * 2 - 1
        u = rng.random((cfg.sweeps, n))
        s = _anneal_kernel(s, betas, u, *arrs)
        seconds[r] = time.perf_counter() - t0
        states[r] = _spins_to_bits(s.astype(np.int64))
    info = {"solver": "sa", "read_seconds": seconds, "sweeps": cfg.sweeps}
    return SampleSet(states, np.ones(cfg.reads, dtype=np.int64), energies(model, states), info)


def default_tenure(n: int) -> int:
    return max(1, min(max(10, n // 4), n - 1))


def tabu_search(model: IsingModel, cfg: TabuConfig = TabuConfig()) -> SampleSet:
    """Steepest single-flip descent with a FIFO tabu tenure and best-so-far aspiration."""
    _warmup()
    n = model.num_vars
    arrs = _model_arrays(model)
    iterations = cfg.iterations if cfg.iterations is not None else 50 * n
    tenure = cfg.tenure if cfg.tenure is not None else default_tenure(n)
    tenure = min(tenure, max(n - 1, 1))
    states = np.empty((cfg.reads, n), dtype=np.uint8)
    seconds = np.empty(cfg.reads)
    for r, ss in enumerate(_read_seeds(cfg.seed, cfg.reads)):
        t0 = time.perf_counter()
        rng = np.random.default_rng(ss)
        bits = rng.integers(0, 2, size=n).astype(np.uint8)
        s = 1.0 - 2.0 * bits
        e0 = float(energies(model, bits[None, :])[0])
        best = _tabu_kernel(s, iterations, tenure, *arrs, e0)
        seconds[r] = time.perf_counter() - t0
        states[r] = _spins_to_bits(best.astype(np.int64))
    info = {"solver": "tabu", "read_seconds": seconds, "iterations": iterations,
            "tenure": tenure}
    return SampleSet(states, np.ones(cfg.reads, dtype=np.int64), energies(model, states), info)


# ---------------------------------------------------------------------------
# time to solution


def tts(success_prob: float, time_per_sample: float, p_d: float = DEFAULT_PD) -> float:
    """``T ln(1 - p_d) / ln(1 - p)``; ``inf`` when ``p == 0`` and ``T`` when ``p >= 1``."""
    if not 0 < p_d < 1:
        raise ParameterError("p_d must lie in (0, 1)")
    if success_prob <= 0:
        return math.inf
    if success_prob >= 1:
        return float(time_per_sample)
    return time_per_sample * math.log1p(-p_d) / math.log1p(-success_prob)


def lr_qaoa_sample_time(n_qubits: int, p: int, t_2q: float = DEFAULT_T2Q) -> float:
    """Circuit time with layers of depth ``2 N_q + 2`` two-qubit gates on a 1D chain."""
    return t_2q * (2 * n_qubits + 2) * p


def lr_qaoa_tts(success_prob: float, n_qubits: int, p: int, t_2q: float = DEFAULT_T2Q,
                p_d: float = DEFAULT_PD) -> float:
    return tts(success_prob, lr_qaoa_sample_time(n_qubits, p, t_2q), p_d)


def solver_success(samples: SampleSet, truth: GroundTruth) -> float:
    """Fraction of reads that reached the ground-state energy."""
    tol = degeneracy_tolerance(np.array([truth.optimal_energy]))
    en = samples.expanded_energies()
    return float(np.mean(en <= truth.optimal_energy + tol))


@dataclass
class SolverReport:
    solver: str
    success_prob: float
    time_per_read: float  # median seconds
    work_per_read: float  # sweeps (SA) or iterations (tabu)
    best_energy: float
    samples: SampleSet = field(repr=False, default=None)

    def tts_seconds(self, p_d: float = DEFAULT_PD) -> float:
        return tts(self.success_prob, self.time_per_read, p_d)

    def tts_work(self, p_d: float = DEFAULT_PD) -> float:
        return tts(self.success_prob, self.work_per_read, p_d)


def run_solver(solver: str, model: IsingModel, truth: GroundTruth | None, cfg) -> SolverReport:
    if solver == "sa":
        samples = simulated_annealing(model, cfg)
        work = float(cfg.sweeps)
    elif solver == "tabu":
        samples = tabu_search(model, cfg)
        work = float(samples.info["iterations"])
    else:
        raise ParameterError(f"unknown solver {solver!r}")
    succ = solver_success(samples, truth) if truth is not None else float("nan")
    return SolverReport(solver, succ, float(np.median(samples.info["read_seconds"])), work,
                        float(samples.energies.min()), samples)


@dataclass
class HardSelection:
    selected: list
    sa_tts: list
    tabu_tts: list
    pcc: float


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 2 or np.std(x) == 0 or np.std(y) == 0:
        return float("nan")
    return float(np.clip(np.corrcoef(x, y)[0, 1], -1.0, 1.0))


def select_hard_instances(models, truths, sa_cfg: AnnealConfig, k: int,
                          tabu_cfg: TabuConfig | None = None, *, unit: str = "work",
                          reports: list | None = None) -> HardSelection:
    """Indices of the ``k`` instances with the longest SA time-to-solution.

    ``unit="work"`` measures TTS in sweeps/iterations, which keeps the ranking
    deterministic; ``"seconds"`` uses median wall time per read. The Pearson
    correlation between log10 SA and tabu TTS over the full set is reported.
    """
    if k > len(models):
        raise ParameterError(f"cannot select {k} of {len(models)} instances")
    if tabu_cfg is None:
        tabu_cfg = TabuConfig(reads=sa_cfg.reads, seed=sa_cfg.seed)
    sa_t, tabu_t = [], []
    for i, (m, t) in enumerate(zip(models, truths)):
        sa = run_solver("sa", m, t, sa_cfg)
        tb = run_solver("tabu", m, t, tabu_cfg)
        if reports is not None:
            reports.append((i, sa, tb))
        pick = (lambda r: r.tts_work()) if unit == "work" else (lambda r: r.tts_seconds())
        sa_t.append(pick(sa))
        tabu_t.append(pick(tb))
    order = sorted(range(len(models)), key=lambda i: (-sa_t[i], i))
    with np.errstate(divide="ignore"):
        pcc = pearson(np.log10(sa_t), np.log10(tabu_t))
    return HardSelection(sorted(order[:k]), sa_t, tabu_t, pcc)
