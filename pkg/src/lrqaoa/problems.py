"""Seeded random instance generators and instance I/O.

Every generator is a pure function of its parameters and seed. Cut-family
models use ``J_kl = w_kl`` before normalization, so for those instances
``cut(x) = (W - scale * energy(model, x)) / 2`` with ``W`` the total weight.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import NormalizationError, ParameterError
from .ising import (
    IsingModel,
    Normalization,
    QuboModel,
    model_from_edges,
    normalization_scale,
    normalize,
    qubo_to_ising,
)

MIS_PENALTY = 2.0
DEFAULT_EDGE_DENSITY = 0.7
DEFAULT_MIS_DENSITY = 0.4
DEFAULT_CLAUSE_RATIO = 4.16


class Family(str, enum.Enum):
    WMAXCUT = "wmaxcut"
    FC_WMAXCUT = "fc_wmaxcut"
    MAXCUT = "maxcut"
    MAXCUT_3REG = "maxcut_3reg"
    MIS = "mis"
    MAX3SAT = "max3sat"
    IMPORTED = "imported"


CUT_FAMILIES = {Family.WMAXCUT, Family.FC_WMAXCUT, Family.MAXCUT, Family.MAXCUT_3REG}

DEFAULT_NORMALIZATION = {
    Family.WMAXCUT: Normalization.MAX_ABS_J,
    Family.FC_WMAXCUT: Normalization.MAX_ABS_J,
    Family.MAXCUT: Normalization.MAX_ABS_J,
    Family.MAXCUT_3REG: Normalization.MAX_ABS_J,
    Family.MAX3SAT: Normalization.MAX_ABS_J,
    Family.MIS: Normalization.MAX_ABS_H,
}


@dataclass(frozen=True)
class ProblemInstance:
    model: IsingModel
    family: Family
    seed: int | None = None
    params: dict = field(default_factory=dict)
    edges: tuple | None = None  # ((i, j, w), ...) for graph problems
    clauses: tuple | None = None  # (((var, negated), x3), ...) for Max-3-SAT
    scale: float = 1.0  # model = raw_model / scale

    @property
    def num_vars(self) -> int:
        return self.model.num_vars

    @property
    def total_weight(self) -> float:
        if self.edges is None:
            raise ParameterError("instance has no graph")
        return float(sum(w for _, _, w in self.edges))

    def raw_model(self) -> IsingModel:
        return self.model.scaled(self.scale)

    def metadata(self) -> dict:
        meta = {"family": self.family.value, "seed": self.seed, "params": self.params,
                "scale": self.scale}
        if self.clauses is not None:
            meta["clauses"] = [[[v, int(neg)] for v, neg in c] for c in self.clauses]
        return meta


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def _finish(raw: IsingModel, family: Family, normalization) -> tuple[IsingModel, float]:
    strategy = DEFAULT_NORMALIZATION[family] if normalization is None else normalization
    if strategy is False:
        return raw, 1.0
    try:
        scale = normalization_scale(raw, strategy)
    except NormalizationError:
        # no nonzero weights: nothing to rescale
        return raw, 1.0
    return normalize(raw, strategy), scale


def _cut_instance(n, edges, family, seed, params, normalization) -> ProblemInstance:
    raw = model_from_edges(n, edges)
    model, scale = _finish(raw, family, normalization)
    return ProblemInstance(model, family, seed, params, tuple(edges), None, scale)


def _check_n(n: int, minimum: int = 2) -> int:
    if int(n) != n or n < minimum:
        raise ParameterError(f"need at least {minimum} nodes, got {n}")
    return int(n)


def _check_density(d: float) -> float:
    if not 0.0 < d <= 1.0:
        raise ParameterError(f"edge density must lie in (0, 1], got {d}")
    return float(d)


def gen_wmaxcut(
    n: int,
    edge_density: float = DEFAULT_EDGE_DENSITY,
    seed: int | None = None,
    *,
    weight_set: Sequence[float] | None = None,
    normalization=None,
) -> ProblemInstance:
    """Erdos-Renyi graph with ``Uniform(0, 1)`` weights (or draws from ``weight_set``)."""
    n = _check_n(n)
    edge_density = _check_density(edge_density)
    rng = _rng(seed)
    pairs = _pairs(n)
    keep = rng.random(len(pairs)) < edge_density
    chosen = [p for p, k in zip(pairs, keep) if k]
    if weight_set is None:
        weights = rng.random(len(chosen))
    else:
        weights = rng.choice(np.asarray(weight_set, dtype=float), size=len(chosen))
    edges = [(i, j, float(w)) for (i, j), w in zip(chosen, weights)]
    params = {"edge_density": edge_density}
    if weight_set is not None:
        params["weight_set"] = [float(w) for w in weight_set]
    return _cut_instance(n, edges, Family.WMAXCUT, seed, params, normalization)


def gen_fc_wmaxcut(n: int, seed: int | None = None, *, normalization=None) -> ProblemInstance:
    """Complete graph with integer weights drawn uniformly from ``{0, ..., 1000}``."""
    n = _check_n(n)
    rng = _rng(seed)
    pairs = _pairs(n)
    weights = rng.integers(0, 1001, size=len(pairs))
    edges = [(i, j, float(w)) for (i, j), w in zip(pairs, weights)]
    return _cut_instance(n, edges, Family.FC_WMAXCUT, seed, {}, normalization)


def gen_maxcut(
    n: int, edge_density: float = DEFAULT_EDGE_DENSITY, seed: int | None = None, *,
    normalization=None,
) -> ProblemInstance:
    n = _check_n(n)
    edge_density = _check_density(edge_density)
    rng = _rng(seed)
    pairs = _pairs(n)
    keep = rng.random(len(pairs)) < edge_density
    edges = [(i, j, 1.0) for (i, j), k in zip(pairs, keep) if k]
    return _cut_instance(n, edges, Family.MAXCUT, seed, {"edge_density": edge_density},
                         normalization)


def random_regular_edges(n: int, degree: int, rng: np.random.Generator,
                         max_tries: int = 100_000) -> list[tuple[int, int]]:
    """Pairing model with rejection of self-loops and multi-edges."""
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(max_tries):
        perm = rng.permutation(stubs).reshape(-1, 2)
        if np.any(perm[:, 0] == perm[:, 1]):
            continue
        edges = {tuple(sorted(map(int, e))) for e in perm}
        if len(edges) == len(perm):
            return sorted(edges)
    raise RuntimeError("failed to sample a simple regular graph")


def gen_maxcut_3reg(n: int, seed: int | None = None, *, normalization=None) -> ProblemInstance:
    n = _check_n(n, 4)
    if n % 2:
        raise ParameterError("3-regular graphs need an even number of nodes")
    rng = _rng(seed)
    edges = [(i, j, 1.0) for i, j in random_regular_edges(n, 3, rng)]
    return _cut_instance(n, edges, Family.MAXCUT_3REG, seed, {}, normalization)


def mis_qubo(n: int, graph_edges, penalty: float = MIS_PENALTY) -> QuboModel:
    terms = {(i, i): -1.0 for i in range(n)}
    for e in graph_edges:
        i, j = sorted(e[:2])
        terms[(i, j)] = terms.get((i, j), 0.0) + penalty
    return QuboModel(n, terms)


def gen_mis(
    n: int, edge_density: float = DEFAULT_MIS_DENSITY, seed: int | None = None, *,
    penalty: float = MIS_PENALTY, normalization=None,
) -> ProblemInstance:
    """Maximum independent set: ``-sum x_i + P sum_E x_i x_j`` mapped to spins."""
    n = _check_n(n, 1)
    edge_density = _check_density(edge_density)
    rng = _rng(seed)
    pairs = _pairs(n)
    keep = rng.random(len(pairs)) < edge_density
    edges = [(i, j, 1.0) for (i, j), k in zip(pairs, keep) if k]
    return mis_from_edges(n, edges, seed=seed, penalty=penalty, normalization=normalization,
                          params={"edge_density": edge_density, "penalty": penalty})


def mis_from_edges(n, edges, *, seed=None, penalty=MIS_PENALTY, normalization=None,
                   params=None) -> ProblemInstance:
    edges = [(int(e[0]), int(e[1]), 1.0) for e in edges]
    raw = qubo_to_ising(mis_qubo(n, edges, penalty))
    model, scale = _finish(raw, Family.MIS, normalization)
    return ProblemInstance(model, Family.MIS, seed, dict(params or {"penalty": penalty}),
                           tuple(edges), None, scale)


def max3sat_model(num_vars: int, clauses) -> IsingModel:
    """Energy ``-(number of satisfied clauses)`` as a cubic spin polynomial.

    A clause is violated iff every literal is false. With ``x = (1 - s) / 2``,
    literal ``x_v`` is false with indicator ``(1 + s_v) / 2`` and ``not x_v``
    with ``(1 - s_v) / 2``, so the violation indicator of a clause is
    ``prod_j (1 + sigma_j s_j) / 2`` and each clause contributes
    ``-1 + prod_j (1 + sigma_j s_j) / 8``.
    """
    h: dict = {}
    J: dict = {}
    K: dict = {}
    offset = 0.0
    for clause in clauses:
        lits = sorted((int(v), -1.0 if neg else 1.0) for v, neg in clause)
        vs = [v for v, _ in lits]
        if len(set(vs)) != 3:
            raise ParameterError(f"clause {clause} must use 3 distinct variables")
        offset += -1.0 + 1.0 / 8
        for v, sg in lits:
            h[v] = h.get(v, 0.0) + sg / 8
        for (a, sa), (b, sb) in itertools.combinations(lits, 2):
            J[(a, b)] = J.get((a, b), 0.0) + sa * sb / 8
        (a, sa), (b, sb), (c, sc) = lits
        K[(a, b, c)] = K.get((a, b, c), 0.0) + sa * sb * sc / 8
    return IsingModel(num_vars, h, J, K, offset)


def count_satisfied(clauses, bits) -> int:
    """Reference clause counter over a bit sequence (``1`` = true)."""
    return sum(any((bits[v] == 1) != bool(neg) for v, neg in c) for c in clauses)


def random_3sat_clauses(n_vars: int, n_clauses: int, rng: np.random.Generator) -> list:
    clauses = []
    for _ in range(n_clauses):
        vs = rng.choice(n_vars, size=3, replace=False)
        negs = rng.random(3) < 0.5
        clauses.append(tuple((int(v), bool(g)) for v, g in zip(vs, negs)))
    return clauses


def gen_max3sat(
    n_vars: int, clause_ratio: float = DEFAULT_CLAUSE_RATIO, seed: int | None = None, *,
    normalization=None,
) -> ProblemInstance:
    if n_vars < 3:
        raise ParameterError("Max-3-SAT needs at least 3 variables")
    n_clauses = int(round(clause_ratio * n_vars))
    if n_clauses < 1:
        raise ParameterError("clause count must be at least 1")
    rng = _rng(seed)
    clauses = tuple(random_3sat_clauses(n_vars, n_clauses, rng))
    raw = max3sat_model(n_vars, clauses)
    model, scale = _finish(raw, Family.MAX3SAT, normalization)
    params = {"clause_ratio": float(clause_ratio), "num_clauses": n_clauses}
    return ProblemInstance(model, Family.MAX3SAT, seed, params, None, clauses, scale)


GENERATORS = {
    Family.WMAXCUT: lambda n, seed, **kw: gen_wmaxcut(n, seed=seed, **kw),
    Family.FC_WMAXCUT: lambda n, seed, **kw: gen_fc_wmaxcut(n, seed=seed, **kw),
    Family.MAXCUT: lambda n, seed, **kw: gen_maxcut(n, seed=seed, **kw),
    Family.MAXCUT_3REG: lambda n, seed, **kw: gen_maxcut_3reg(n, seed=seed, **kw),
    Family.MIS: lambda n, seed, **kw: gen_mis(n, seed=seed, **kw),
    Family.MAX3SAT: lambda n, seed, **kw: gen_max3sat(n, seed=seed, **kw),
}


def generate(family: Family | str, n: int, seed: int, **params) -> ProblemInstance:
    family = Family(family)
    if family not in GENERATORS:
        raise ParameterError(f"no generator for family {family.value!r}")
    return GENERATORS[family](n, seed, **params)


# ---------------------------------------------------------------------------
# files


def graph_path_for(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".graph.txt")


def instance_to_json(inst: ProblemInstance) -> str:
    return json.dumps(inst.model.to_dict(inst.metadata()), indent=2, sort_keys=True)


def write_edges(edges, path) -> None:
    lines = [f"{i} {j} {w!r}" for i, j, w in edges]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_edges(path) -> list[tuple[int, int, float]]:
    edges = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        w = float(parts[2]) if len(parts) > 2 else 1.0
        edges.append((int(parts[0]), int(parts[1]), w))
    return edges


def save_instance(inst: ProblemInstance, path) -> None:
    """Write the instance JSON and, for graph problems, the ``.graph.txt`` sidecar."""
    path = Path(path)
    path.write_text(instance_to_json(inst))
    if inst.edges is not None:
        write_edges(inst.edges, graph_path_for(path))


def load_instance(path, graph_path=None) -> ProblemInstance:
    path = Path(path)
    data = json.loads(path.read_text())
    model = IsingModel.from_dict(data)
    meta = data.get("metadata") or {}
    try:
        family = Family(meta.get("family", Family.IMPORTED.value))
    except ValueError:
        family = Family.IMPORTED
    gp = Path(graph_path) if graph_path else graph_path_for(path)
    edges = tuple(read_edges(gp)) if gp.exists() else None
    clauses = meta.get("clauses")
    if clauses is not None:
        clauses = tuple(tuple((int(v), bool(neg)) for v, neg in c) for c in clauses)
    return ProblemInstance(model, family, meta.get("seed"), dict(meta.get("params") or {}),
                           edges, clauses, float(meta.get("scale", 1.0)))
