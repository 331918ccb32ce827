"""Ising and QUBO models, energy evaluation and exhaustive ground-truth search.

Spin convention used everywhere in the package: ``s_i = 1 - 2 * b_i``, i.e. bit 0
is spin +1 (the +1 eigenstate of sigma_z). Bitstrings are written with character
``i`` holding the bit of variable ``i``; the matching basis-state index is
``k = sum_i b_i 2**i``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, NormalizationError, ParameterError

BRUTE_FORCE_CAP = 26

# relative tolerance used to decide energy degeneracy
DEGENERACY_RTOL = 1e-9


def _canon_key(key, arity: int) -> tuple[int, ...]:
    if isinstance(key, str):
        key = tuple(int(p) for p in key.split(","))
    elif isinstance(key, (int, np.integer)):
        key = (int(key),)
    key = tuple(int(k) for k in key)
    if len(key) != arity:
        raise ParameterError(f"expected a {arity}-index key, got {key!r}")
    return key


def _canon_terms(terms, arity: int, num_vars: int, *, allow_equal: bool = False) -> dict:
    out: dict = {}
    if terms is None:
        return out
    items = terms.items() if isinstance(terms, Mapping) else enumerate(terms)
    for key, value in items:
        idx = _canon_key(key, arity)
        value = float(value)
        if not math.isfinite(value):
            raise ParameterError(f"non-finite coefficient {value} at {idx}")
        if any(i < 0 or i >= num_vars for i in idx):
            raise ParameterError(f"index {idx} out of range for {num_vars} variables")
        ordered = all(a < b for a, b in zip(idx, idx[1:])) or (
            allow_equal and all(a <= b for a, b in zip(idx, idx[1:]))
        )
        if not ordered:
            raise ParameterError(f"indices must be strictly increasing, got {idx}")
        k = idx[0] if arity == 1 else idx
        if k in out:
            raise ParameterError(f"duplicate key {idx}")
        if value != 0.0:
            out[k] = value
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class IsingModel:
    """Spin Hamiltonian ``sum h_i s_i + sum J_ij s_i s_j + sum K_ijk s_i s_j s_k + offset``.

    ``linear`` may be given as a sequence (dense ``h``) or a mapping. Zero
    coefficients are dropped. Keys of ``quadratic``/``cubic`` must be strictly
    increasing tuples (or ``"i,j"`` strings, as in the JSON format).
    """

    num_vars: int
    linear: dict = field(default_factory=dict)
    quadratic: dict = field(default_factory=dict)
    cubic: dict = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        n = int(self.num_vars)
        if n < 0:
            raise ParameterError("num_vars must be non-negative")
        object.__setattr__(self, "num_vars", n)
        object.__setattr__(self, "linear", _canon_terms(self.linear, 1, n))
        object.__setattr__(self, "quadratic", _canon_terms(self.quadratic, 2, n))
        object.__setattr__(self, "cubic", _canon_terms(self.cubic, 3, n))
        off = float(self.offset)
        if not math.isfinite(off):
            raise ParameterError("offset must be finite")
        object.__setattr__(self, "offset", off)

    @property
    def is_quadratic(self) -> bool:
        return not self.cubic

    def scaled(self, factor: float) -> "IsingModel":
        factor = float(factor)
        return IsingModel(
            self.num_vars,
            {i: v * factor for i, v in self.linear.items()},
            {k: v * factor for k, v in self.quadratic.items()},
            {k: v * factor for k, v in self.cubic.items()},
            self.offset * factor,
        )

    def __add__(self, other: "IsingModel") -> "IsingModel":
        if not isinstance(other, IsingModel):
            return NotImplemented
        if other.num_vars != self.num_vars:
            raise ParameterError("cannot add models with different num_vars")

        def merge(a, b):
            out = dict(a)
            for k, v in b.items():
                out[k] = out.get(k, 0.0) + v
            return out

        return IsingModel(
            self.num_vars,
            merge(self.linear, other.linear),
            merge(self.quadratic, other.quadratic),
            merge(self.cubic, other.cubic),
            self.offset + other.offset,
        )

    def linear_array(self) -> np.ndarray:
        h = np.zeros(self.num_vars)
        for i, v in self.linear.items():
            h[i] = v
        return h

    def coupling_matrix(self) -> np.ndarray:
        """Dense symmetric ``J`` with zero diagonal."""
        J = np.zeros((self.num_vars, self.num_vars))
        for (i, j), v in self.quadratic.items():
            J[i, j] = v
            J[j, i] = v
        return J

    def to_dict(self, metadata: Mapping | None = None) -> dict:
        return {
            "num_vars": self.num_vars,
            "linear": {str(i): v for i, v in self.linear.items()},
            "quadratic": {f"{i},{j}": v for (i, j), v in self.quadratic.items()},
            "cubic": {f"{i},{j},{k}": v for (i, j, k), v in self.cubic.items()},
            "offset": self.offset,
            "metadata": dict(metadata or {}),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "IsingModel":
        try:
            return cls(
                int(data["num_vars"]),
                data.get("linear") or {},
                data.get("quadratic") or {},
                data.get("cubic") or {},
                float(data.get("offset", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"malformed instance: {exc}") from exc


def save_model(model: IsingModel, path, metadata: Mapping | None = None) -> None:
    Path(path).write_text(json.dumps(model.to_dict(metadata), indent=2, sort_keys=True))


def load_model(path) -> tuple[IsingModel, dict]:
    """Read the JSON instance format; returns ``(model, metadata)``."""
    data = json.loads(Path(path).read_text())
    return IsingModel.from_dict(data), dict(data.get("metadata") or {})


# ---------------------------------------------------------------------------
# bitstrings


def bits_to_index(bits: str) -> int:
    return sum(1 << i for i, c in enumerate(bits) if c == "1")


def index_to_bits(k: int, n: int) -> str:
    return "".join("1" if (k >> i) & 1 else "0" for i in range(n))


def bits_to_array(bits) -> np.ndarray:
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ParameterError(f"invalid bitstring {bits!r}")
        return np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
    return np.asarray(bits, dtype=np.uint8)


def indices_to_array(indices: np.ndarray, n: int) -> np.ndarray:
    """Basis-state indices -> ``(len, n)`` array of bits."""
    indices = np.asarray(indices, dtype=np.int64)
    return ((indices[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def array_to_indices(states: np.ndarray) -> np.ndarray:
    states = np.asarray(states, dtype=np.int64)
    return states @ (np.int64(1) << np.arange(states.shape[1], dtype=np.int64))


# ---------------------------------------------------------------------------
# energies


def energy(model: IsingModel, bits) -> float:
    b = bits_to_array(bits)
    if b.shape != (model.num_vars,):
        raise ParameterError(
            f"bitstring length {b.size} does not match num_vars={model.num_vars}"
        )
    s = 1 - 2 * b.astype(np.int64)
    e = model.offset
    for i, v in model.linear.items():
        e += v * s[i]
    for (i, j), v in model.quadratic.items():
        e += v * s[i] * s[j]
    for (i, j, k), v in model.cubic.items():
        e += v * s[i] * s[j] * s[k]
    return float(e)


def energies(model: IsingModel, states: np.ndarray) -> np.ndarray:
    """Vectorized energies for a ``(m, n)`` array of bits."""
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[1] != model.num_vars:
        raise ParameterError("states must have shape (m, num_vars)")
    s = 1.0 - 2.0 * states
    e = np.full(states.shape[0], model.offset)
    if model.linear:
        e += s @ model.linear_array()
    if model.quadratic:
        idx = np.array(list(model.quadratic), dtype=np.int64)
        e += (s[:, idx[:, 0]] * s[:, idx[:, 1]]) @ np.array(list(model.quadratic.values()))
    if model.cubic:
        idx = np.array(list(model.cubic), dtype=np.int64)
        e += (s[:, idx[:, 0]] * s[:, idx[:, 1]] * s[:, idx[:, 2]]) @ np.array(
            list(model.cubic.values())
        )
    return e


def local_fields(model: IsingModel, states: np.ndarray) -> np.ndarray:
    """``dE/ds_i`` at each state; flipping bit ``i`` changes energy by ``-2 s_i f_i``."""
    states = np.asarray(states)
    s = 1.0 - 2.0 * states
    f = np.tile(model.linear_array(), (states.shape[0], 1))
    if model.quadratic:
        f += s @ model.coupling_matrix()
    for (i, j, k), v in model.cubic.items():
        f[:, i] += v * s[:, j] * s[:, k]
        f[:, j] += v * s[:, i] * s[:, k]
        f[:, k] += v * s[:, i] * s[:, j]
    return f


def energy_table(model: IsingModel, cap: int = BRUTE_FORCE_CAP) -> np.ndarray:
    """Energies of all ``2**n`` basis states, entry ``k`` for bitstring ``index_to_bits(k)``.

    Built by doubling: adding variable ``m`` splits every state over ``m`` lower
    variables into ``s_m = +1`` (bit 0, first half) and ``s_m = -1``.
    """
    n = model.num_vars
    if n > cap:
        raise CapacityError(f"{n} variables exceeds the exhaustive cap of {cap}")
    by_top_lin = model.linear
    quad_by_top: dict[int, list] = {}
    for (i, j), v in model.quadratic.items():
        quad_by_top.setdefault(j, []).append((i, v))
    cub_by_top: dict[int, list] = {}
    for (i, j, k), v in model.cubic.items():
        cub_by_top.setdefault(k, []).append((i, j, v))

    table = np.full(1, model.offset)
    for m in range(n):
        size = 1 << m
        fld = np.full(size, by_top_lin.get(m, 0.0))
        if quad_by_top.get(m) or cub_by_top.get(m):
            idx = np.arange(size, dtype=np.int64)
            spin = {}

            def s(j):
                if j not in spin:
                    spin[j] = 1.0 - 2.0 * ((idx >> j) & 1)
                return spin[j]

            for i, v in quad_by_top.get(m, ()):
                fld += v * s(i)
            for i, j, v in cub_by_top.get(m, ()):
                fld += v * s(i) * s(j)
        table = np.concatenate([table + fld, table - fld])
    return table


# ---------------------------------------------------------------------------
# normalization


class Normalization(str, enum.Enum):
    MAX_ABS_J = "max_abs_j"
    MAX_ABS_HJ = "max_abs_hj"
    MAX_ABS_H = "max_abs_h"


def normalization_scale(model: IsingModel, strategy: Normalization | str) -> float:
    strategy = Normalization(strategy)
    if strategy is Normalization.MAX_ABS_J:
        pool = list(model.quadratic.values())
    elif strategy is Normalization.MAX_ABS_H:
        pool = list(model.linear.values())
    else:
        pool = list(model.linear.values()) + list(model.quadratic.values())
    scale = max((abs(v) for v in pool), default=0.0)
    if scale == 0.0:
        raise NormalizationError(f"{strategy.value}: no nonzero coefficient to normalize by")
    return scale


def normalize(model: IsingModel, strategy: Normalization | str) -> IsingModel:
    """Divide every coefficient (offset and cubic terms included) by a max-abs scale."""
    scale = normalization_scale(model, strategy)
    if scale == 1.0:
        return model
    return model.scaled(1.0 / scale)


# ---------------------------------------------------------------------------
# QUBO


@dataclass(frozen=True)
class QuboModel:
    """``sum_{i<=j} Q_ij x_i x_j + constant`` over binary ``x``; diagonal entries are linear."""

    num_vars: int
    terms: dict = field(default_factory=dict)
    constant: float = 0.0

    def __post_init__(self):
        n = int(self.num_vars)
        object.__setattr__(self, "num_vars", n)
        terms = {}
        for key, v in dict(self.terms).items():
            key = _canon_key(key, 2) if not isinstance(key, (int, np.integer)) else (key, key)
            i, j = sorted(key)
            if not (0 <= i < n and 0 <= j < n):
                raise ParameterError(f"QUBO index {key} out of range")
            v = float(v)
            if not math.isfinite(v):
                raise ParameterError("non-finite QUBO coefficient")
            terms[(i, j)] = terms.get((i, j), 0.0) + v
        object.__setattr__(self, "terms", dict(sorted(terms.items())))
        object.__setattr__(self, "constant", float(self.constant))

    def value(self, bits) -> float:
        x = bits_to_array(bits)
        if x.shape != (self.num_vars,):
            raise ParameterError("bitstring length mismatch")
        return float(self.constant + sum(v * x[i] * x[j] for (i, j), v in self.terms.items()))


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Substitute ``x_i = (1 - s_i) / 2``."""
    h: dict[int, float] = {}
    J: dict[tuple, float] = {}
    offset = q.constant
    for (i, j), v in q.terms.items():
        if i == j:
            offset += v / 2
            h[i] = h.get(i, 0.0) - v / 2
        else:
            offset += v / 4
            h[i] = h.get(i, 0.0) - v / 4
            h[j] = h.get(j, 0.0) - v / 4
            J[(i, j)] = J.get((i, j), 0.0) + v / 4
    return IsingModel(q.num_vars, h, J, {}, offset)


# ---------------------------------------------------------------------------
# ground truth


@dataclass(frozen=True)
class GroundTruth:
    optimal_energy: float
    optimal_indices: np.ndarray
    num_vars: int
    spectrum: list | None = None

    @property
    def optimal_bitstrings(self) -> frozenset:
        return frozenset(index_to_bits(int(k), self.num_vars) for k in self.optimal_indices)

    @property
    def degeneracy(self) -> int:
        return int(self.optimal_indices.size)


def degeneracy_tolerance(table: np.ndarray) -> float:
    scale = float(np.max(np.abs(table))) if table.size else 0.0
    return DEGENERACY_RTOL * max(scale, 1.0)


def group_levels(values: np.ndarray, tol: float) -> list[tuple[float, int]]:
    """Sorted ``(level, multiplicity)`` pairs, merging values closer than ``tol``."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(v) > tol) + 1
    starts = np.concatenate([[0], breaks])
    ends = np.concatenate([breaks, [v.size]])
    return [(float(v[a]), int(b - a)) for a, b in zip(starts, ends)]


def brute_force(
    model: IsingModel, *, spectrum: bool = False, cap: int = BRUTE_FORCE_CAP,
    table: np.ndarray | None = None,
) -> GroundTruth:
    """Exhaustive scan of all ``2**n`` states."""
    if table is None:
        table = energy_table(model, cap=cap)
    emin = float(table.min())
    tol = degeneracy_tolerance(table)
    opt = np.flatnonzero(table <= emin + tol)
    levels = group_levels(table, tol) if spectrum else None
    return GroundTruth(emin, opt, model.num_vars, levels)


def complement(bits: str) -> str:
    return bits.translate(str.maketrans("01", "10"))


def iter_bitstrings(n: int) -> Iterable[str]:
    for k in range(1 << n):
        yield index_to_bits(k, n)


def model_from_edges(num_vars: int, edges: Sequence[tuple[int, int, float]]) -> IsingModel:
    J: dict[tuple, float] = {}
    for i, j, w in edges:
        i, j = sorted((int(i), int(j)))
        J[(i, j)] = J.get((i, j), 0.0) + float(w)
    return IsingModel(num_vars, {}, J)
