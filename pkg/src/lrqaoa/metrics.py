"""Sample sets, success metrics, Hamming-distance-1 mitigation and scaling fits."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, UndefinedMetricError
from .ising import (
    GroundTruth,
    IsingModel,
    array_to_indices,
    bits_to_array,
    energies,
    indices_to_array,
    local_fields,
)

log = logging.getLogger(__name__)

DEFAULT_NQ_MIN = 10


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Rows of bits with multiplicities; rows need not be unique (e.g. one per solver read)."""

    states: np.ndarray  # (m, n) uint8
    counts: np.ndarray  # (m,) int64, all >= 1
    energies: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=np.uint8))
        counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if states.shape[0] != counts.shape[0]:
            raise ParameterError("states and counts have different lengths")
        if np.any(counts < 1):
            raise ParameterError("sample counts must be >= 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "counts", counts)
        if self.energies is not None:
            object.__setattr__(self, "energies", np.asarray(self.energies, dtype=float))

    @property
    def num_vars(self) -> int:
        return self.states.shape[1]

    @property
    def total_shots(self) -> int:
        return int(self.counts.sum())

    def __len__(self) -> int:
        return self.states.shape[0]

    def indices(self) -> np.ndarray:
        return array_to_indices(self.states)

    def bitstrings(self) -> list[str]:
        return ["".join("1" if b else "0" for b in row) for row in self.states]

    def entries(self) -> list[tuple[str, int]]:
        return list(zip(self.bitstrings(), self.counts.tolist()))

    def with_energies(self, model: IsingModel) -> "SampleSet":
        return SampleSet(self.states, self.counts, energies(model, self.states), dict(self.info))

    def expanded_energies(self) -> np.ndarray:
        if self.energies is None:
            raise UndefinedMetricError("energies not attached; call with_energies first")
        return np.repeat(self.energies, self.counts)

    def aggregate(self) -> "SampleSet":
        """Merge identical rows, ordered by basis-state index."""
        idx = self.indices()
        uniq, inv = np.unique(idx, return_inverse=True)
        counts = np.bincount(inv, weights=self.counts).astype(np.int64)
        en = None
        if self.energies is not None:
            en = np.zeros(uniq.size)
            en[inv] = self.energies
        return SampleSet(indices_to_array(uniq, self.num_vars), counts, en, dict(self.info))

    @classmethod
    def from_indices(cls, indices, counts, n: int, model: IsingModel | None = None,
                     info: dict | None = None) -> "SampleSet":
        states = indices_to_array(np.asarray(indices), n)
        en = energies(model, states) if model is not None else None
        return cls(states, counts, en, dict(info or {}))

    @classmethod
    def from_bitstrings(cls, bits, model: IsingModel | None = None) -> "SampleSet":
        """``bits`` is a list of strings (count 1 each) or a ``{bitstring: count}`` mapping."""
        if isinstance(bits, dict):
            keys, counts = list(bits), list(bits.values())
        else:
            keys, counts = list(bits), [1] * len(bits)
        states = np.array([bits_to_array(b) for b in keys], dtype=np.uint8)
        en = energies(model, states) if model is not None else None
        return cls(states, counts, en)


# ---------------------------------------------------------------------------
# cut metrics


def cut_values(states: np.ndarray, edges) -> np.ndarray:
    """``C(x) = sum_kl w_kl (x_k + x_l - 2 x_k x_l)`` for each row of ``states``."""
    states = np.atleast_2d(np.asarray(states, dtype=np.int64))
    if not edges:
        return np.zeros(states.shape[0])
    e = np.asarray([(i, j) for i, j, _ in edges], dtype=np.int64)
    w = np.asarray([w for _, _, w in edges], dtype=float)
    xk, xl = states[:, e[:, 0]], states[:, e[:, 1]]
    return (xk + xl - 2 * xk * xl) @ w


def max_cut_value(edges, n: int) -> float:
    from .ising import energy_table, model_from_edges

    table = energy_table(model_from_edges(n, edges))
    total = sum(w for _, _, w in edges)
    return float((total - table.min()) / 2)


def approximation_ratio(samples: SampleSet, edges, max_cut: float | None = None) -> float:
    """Shot-weighted mean cut over the maximum cut."""
    if edges is None:
        raise UndefinedMetricError("approximation ratio needs the weighted graph")
    if max_cut is None:
        max_cut = max_cut_value(edges, samples.num_vars)
    if max_cut <= 0:
        raise UndefinedMetricError("maximum cut is zero")
    cuts = cut_values(samples.states, edges)
    return float(cuts @ samples.counts / samples.total_shots / max_cut)


# ---------------------------------------------------------------------------
# success


def success_probability_sampled(samples: SampleSet, truth: GroundTruth) -> float:
    hit = np.isin(samples.indices(), truth.optimal_indices)
    return float(samples.counts[hit].sum() / samples.total_shots)


# ---------------------------------------------------------------------------
# mitigation


def mitigate_hd1(samples: SampleSet, model: IsingModel) -> SampleSet:
    """Replace every sample by its lowest-energy single-bit-flip neighbour.

    All ``n`` flips are scored from local fields (``dE_i = -2 s_i f_i``). The
    original is kept unless some flip lowers the energy; among equally good
    flips the lowest bit index wins. Row order and counts are preserved.
    """
    if samples.num_vars != model.num_vars:
        raise ParameterError("sample length does not match the model")
    states = samples.states
    if len(samples) == 0:
        return samples
    s = 1.0 - 2.0 * states
    delta = -2.0 * s * local_fields(model, states)
    scale = max([1.0] + [abs(v) for d in (model.linear, model.quadratic, model.cubic)
                         for v in d.values()])
    tol = 1e-12 * scale * max(1, model.num_vars)
    best = delta.min(axis=1)
    first = np.argmax(delta <= best[:, None] + tol, axis=1)
    improve = best < -tol
    out = states.copy()
    rows = np.flatnonzero(improve)
    out[rows, first[rows]] ^= 1
    info = dict(samples.info)
    info["mitigated"] = int(improve.sum())
    return SampleSet(out, samples.counts, energies(model, out), info)


def random_samples(n: int, shots: int, seed) -> SampleSet:
    """Uniformly random bitstrings, the baseline the mitigated sampler is compared to."""
    rng = np.random.default_rng(seed)
    states = rng.integers(0, 2, size=(shots, n), dtype=np.uint8)
    return SampleSet(states, np.ones(shots, dtype=np.int64))


# ---------------------------------------------------------------------------
# scaling fits


@dataclass(frozen=True)
class ScalingFit:
    eta: float
    c: float
    n_q_min: int
    points: list
    relative_error: float
    dropped: int = 0

    def predict(self, n_q) -> np.ndarray:
        return 2.0 ** (-self.eta * np.asarray(n_q, dtype=float) + self.c)

    def to_dict(self) -> dict:
        return {"eta": self.eta, "c": self.c, "n_q_min": self.n_q_min,
                "relative_error": self.relative_error, "dropped": self.dropped,
                "points": [list(p) for p in self.points]}


def loglinear_fit(x, log2_y) -> tuple[float, float]:
    """Least-squares line ``log2_y = slope * x + intercept``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(log2_y, dtype=float)
    if np.unique(x).size < 2:
        raise ParameterError("need at least two distinct abscissae")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(slope), float(intercept)


def fit_scaling(points, n_q_min: int = DEFAULT_NQ_MIN, *, per_instance: bool = False) -> ScalingFit:
    """Fit ``probability = 2**(-eta N_q + C)``.

    By default each size contributes the mean of ``log2(prob)`` over its
    instances; ``per_instance`` regresses every point individually. Points with
    zero probability are dropped (logged).
    """
    pts = [(int(n), float(p)) for n, p in points if n >= n_q_min]
    kept = [(n, p) for n, p in pts if p > 0]
    dropped = len(pts) - len(kept)
    if dropped:
        log.warning("dropping %d zero-probability points from the scaling fit", dropped)
    if not kept:
        raise ParameterError("no usable points for the scaling fit")
    n_arr = np.array([n for n, _ in kept])
    lp = np.log2([p for _, p in kept])
    if per_instance:
        xs, ys = n_arr, lp
    else:
        xs = np.unique(n_arr)
        ys = np.array([lp[n_arr == n].mean() for n in xs])
    slope, intercept = loglinear_fit(xs, ys)
    eta, c = -slope, intercept
    pred = 2.0 ** (-eta * xs + c)
    rel = float(np.mean(np.abs(1.0 - pred / 2.0 ** ys)))
    return ScalingFit(eta, c, n_q_min, [(int(x), float(y)) for x, y in zip(xs, ys)], rel,
                      dropped)


def quadratic_speedup_reference(n) -> float:
    """``2 / 2**(n/2)``: success probability of a search with a square-root speed-up."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    return 2.0 * 2.0 ** (-n / 2)


def random_guess_probability(truth: GroundTruth) -> float:
    return truth.degeneracy / 2.0 ** truth.num_vars


def summarize(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {"median": float(np.median(v)), "q1": float(np.quantile(v, 0.25)),
            "q3": float(np.quantile(v, 0.75)), "mean": float(v.mean()), "count": int(v.size)}


__all__ = [
    "SampleSet", "ScalingFit", "approximation_ratio", "cut_values", "fit_scaling",
    "loglinear_fit", "max_cut_value", "mitigate_hd1", "quadratic_speedup_reference",
    "random_guess_probability", "random_samples", "success_probability_sampled", "summarize",
]
