"""Batch experiments: size/seed/depth sweeps, delta scans and solver comparisons.

Results live on the filesystem. Every run is keyed by a content hash of the
inputs that determine it, so rerunning a configuration reuses finished runs
and reproduces byte-identical aggregate files.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import baselines
from .errors import ParameterError
from .ising import GroundTruth, brute_force
from .metrics import (
    SampleSet,
    approximation_ratio,
    fit_scaling,
    loglinear_fit,
    max_cut_value,
    mitigate_hd1,
    success_probability_sampled,
    summarize,
)
from .problems import CUT_FAMILIES, Family, ProblemInstance, generate, instance_to_json
from .schedule import SCAN_MAX, build_schedule, delta_grid
from .simulator import EnergyTable, expected_energy, run, success_probability

log = logging.getLogger(__name__)

DEFAULT_SCAN = {"beta_range": [0.1, 1.1], "gamma_range": [0.1, 1.3], "steps": [6, 7]}


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    family: str = Family.WMAXCUT.value
    params: dict = field(default_factory=dict)
    sizes: list = field(default_factory=lambda: [10])
    seeds: list = field(default_factory=lambda: [0])
    p_values: list = field(default_factory=lambda: [10])
    # {"fixed": [delta_beta, delta_gamma]} or {"scan": {beta_range, gamma_range, steps}}
    delta_policy: dict = field(default_factory=lambda: {"fixed": [0.3, 0.6]})
    shots: int = 0
    mitigate: bool = False
    noise: dict | None = None
    output_dir: str = "results"

    def __post_init__(self):
        Family(self.family)
        for name in ("sizes", "seeds", "p_values"):
            if not getattr(self, name):
                raise ParameterError(f"{name} must be non-empty")
        if ("fixed" in self.delta_policy) == ("scan" in self.delta_policy):
            raise ParameterError("delta_policy needs exactly one of 'fixed' or 'scan'")
        if "scan" in self.delta_policy:
            self.scan_grid()  # validates ranges
        if self.shots < 0:
            raise ParameterError("shots must be >= 0")

    def scan_grid(self) -> list[tuple[float, float]]:
        scan = {**DEFAULT_SCAN, **(self.delta_policy.get("scan") or {})}
        steps = scan["steps"]
        steps = int(steps) if isinstance(steps, (int, float)) else tuple(int(s) for s in steps)
        return delta_grid(tuple(scan["beta_range"]), tuple(scan["gamma_range"]), steps)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ParameterError(f"bad config file {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)


def content_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:20]


# ---------------------------------------------------------------------------
# per-process instance cache


@functools.lru_cache(maxsize=8)
def _prepared(family: str, n: int, seed: int, params_json: str):
    inst = generate(family, n, seed, **json.loads(params_json))
    table = EnergyTable.from_model(inst.model)
    truth = brute_force(inst.model, table=table.energies)
    max_cut = None
    if inst.family in CUT_FAMILIES and inst.edges:
        max_cut = (inst.total_weight - inst.scale * truth.optimal_energy) / 2
    return inst, table, truth, max_cut


def prepare(family, n, seed, params) -> tuple[ProblemInstance, EnergyTable, GroundTruth, float | None]:
    return _prepared(Family(family).value, int(n), int(seed), json.dumps(params, sort_keys=True))


def simulate_point(task: dict) -> dict:
    """One noiseless (or noisy) LR-QAOA run; pure function of ``task``."""
    inst, table, truth, max_cut = prepare(task["family"], task["n"], task["seed"], task["params"])
    sched = build_schedule(task["delta_beta"], task["delta_gamma"], task["p"])
    row = {"family": task["family"], "n_qubits": task["n"]}
    row.update({k: task[k] for k in ("p", "seed", "delta_beta", "delta_gamma")})
    noise_cfg = task.get("noise")
    if noise_cfg:
        from .noise import NoiseConfig, noisy_probabilities

        cfg = NoiseConfig(noise_cfg["lambda"], noise_cfg.get("backend", "density"),
                          noise_cfg.get("trajectories", 1000), noise_cfg.get("seed", 0))
        probs = noisy_probabilities(inst.model, sched, cfg)
        row["success_prob"] = float(probs[truth.optimal_indices].sum())
        row["mean_energy"] = float(probs @ table.energies)
    else:
        state, _ = run(inst.model, sched, table=table)
        probs = state.probabilities()
        row["success_prob"] = success_probability(state, truth)
        row["mean_energy"] = expected_energy(state, table)
    row["random_prob"] = truth.degeneracy / 2.0 ** truth.num_vars
    if max_cut:
        mean_cut = (inst.total_weight - inst.scale * row["mean_energy"]) / 2
        row["approx_ratio"] = mean_cut / max_cut
    shots = task.get("shots", 0)
    if shots:
        rng_seed = [task["seed"], task["p"], 7919]
        counts = np.random.default_rng(rng_seed).multinomial(shots, probs / probs.sum())
        nz = np.flatnonzero(counts)
        samples = SampleSet.from_indices(nz, counts[nz], inst.num_vars, inst.model)
        row["sampled_success"] = success_probability_sampled(samples, truth)
        if task.get("mitigate"):
            mit = mitigate_hd1(samples, inst.model)
            row["mitigated_success"] = success_probability_sampled(mit, truth)
            if max_cut:
                row["mitigated_approx_ratio"] = approximation_ratio(mit, inst.edges, max_cut)
    return row


def _map(fn: Callable, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# ---------------------------------------------------------------------------
# performance diagrams


def scan_performance_diagram(model, truth: GroundTruth, p: int, grid, *,
                             table: EnergyTable | None = None) -> list[dict]:
    """Success probability and mean energy at each ``(delta_beta, delta_gamma)``."""
    if table is None:
        table = EnergyTable.from_model(model)
    rows = []
    for db, dg in grid:
        state, _ = run(model, build_schedule(db, dg, p), table=table)
        rows.append({"delta_beta": db, "delta_gamma": dg,
                     "prob": success_probability(state, truth),
                     "mean_energy": expected_energy(state, table)})
    return rows


def best_cell(rows: list[dict]) -> dict:
    """Highest success probability; earliest grid cell wins ties."""
    best = rows[0]
    for r in rows[1:]:
        if r["prob"] > best["prob"]:
            best = r
    return best


def heatmap_matrix(rows: list[dict]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    betas = np.unique([r["delta_beta"] for r in rows])
    gammas = np.unique([r["delta_gamma"] for r in rows])
    m = np.full((betas.size, gammas.size), np.nan)
    for r in rows:
        m[np.searchsorted(betas, r["delta_beta"]), np.searchsorted(gammas, r["delta_gamma"])] = r["prob"]
    return betas, gammas, m


def ridge_connected(rows: list[dict], threshold: float) -> bool:
    """True if the cells with ``prob >= threshold`` form one 4-connected region."""
    from scipy import ndimage

    _, _, m = heatmap_matrix(rows)
    mask = np.nan_to_num(m, nan=0.0) >= threshold
    if not mask.any():
        return False
    _, count = ndimage.label(mask)
    return count == 1


# ---------------------------------------------------------------------------
# writing


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    Path(path).write_text(buf.getvalue())


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# experiment driver


RUN_COLUMNS = ["family", "n_qubits", "p", "seed", "delta_beta", "delta_gamma", "success_prob",
               "random_prob", "mean_energy", "approx_ratio", "sampled_success",
               "mitigated_success", "mitigated_approx_ratio"]


def _base_task(cfg: ExperimentConfig, n: int, seed: int, p: int) -> dict:
    return {"family": cfg.family, "n": int(n), "seed": int(seed), "p": int(p),
            "params": cfg.params, "shots": cfg.shots, "mitigate": cfg.mitigate,
            "noise": cfg.noise}


def _cached(out: Path, sub: str, key_obj, compute: Callable[[], object]):
    path = out / sub / f"{content_hash(key_obj)}.json"
    if path.exists():
        return json.loads(path.read_text()), False
    value = compute()
    path.parent.mkdir(parents=True, exist_ok=True)
    _dump(path, {"key": key_obj, "value": value})
    return {"key": key_obj, "value": value}, True


def _instance_fingerprint(cfg, n, seed) -> str:
    inst, *_ = prepare(cfg.family, n, seed, cfg.params)
    return hashlib.sha256(instance_to_json(inst).encode()).hexdigest()[:20]


def run_experiment(cfg: ExperimentConfig, *, workers: int = 1, out: str | Path | None = None) -> Path:
    """Run every (size, seed, p) point and write ``runs.csv``, ``summary.csv``, ``scaling.json``."""
    out = Path(out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump(out / "config.json", cfg.to_dict())
    computed = 0

    deltas: dict[tuple[int, int], tuple[float, float]] = {}
    scan_rows_all = []
    if "fixed" in cfg.delta_policy:
        db, dg = (float(x) for x in cfg.delta_policy["fixed"])
        for n in cfg.sizes:
            for p in cfg.p_values:
                deltas[(n, p)] = (db, dg)
    else:
        grid = cfg.scan_grid()
        seed0 = cfg.seeds[0]
        for n in cfg.sizes:
            for p in cfg.p_values:
                key = {"kind": "scan", "instance": _instance_fingerprint(cfg, n, seed0),
                       "p": int(p), "grid": grid, "noise": cfg.noise}
                base = _base_task(cfg, n, seed0, p)
                base.update(shots=0, mitigate=False)

                def compute(base=base, grid=grid):
                    tasks = [{**base, "delta_beta": b, "delta_gamma": g} for b, g in grid]
                    return [{"delta_beta": r["delta_beta"], "delta_gamma": r["delta_gamma"],
                             "prob": r["success_prob"], "mean_energy": r["mean_energy"]}
                            for r in _map(simulate_point, tasks, workers)]

                rec, fresh = _cached(out, "scans", key, compute)
                computed += fresh
                rows = rec["value"]
                best = best_cell(rows)
                deltas[(n, p)] = (best["delta_beta"], best["delta_gamma"])
                for r in rows:
                    scan_rows_all.append({"n": n, "p": p, "seed": seed0, **r})
        write_csv(out / "scan.csv", scan_rows_all,
                  ["n", "p", "seed", "delta_beta", "delta_gamma", "prob", "mean_energy"])

    pending, keys, results = [], [], {}
    for n in cfg.sizes:
        for p in cfg.p_values:
            db, dg = deltas[(n, p)]
            for seed in cfg.seeds:
                task = {**_base_task(cfg, n, seed, p), "delta_beta": db, "delta_gamma": dg}
                key = {"kind": "run", "instance": _instance_fingerprint(cfg, n, seed), **task}
                path = out / "runs" / f"{content_hash(key)}.json"
                if path.exists():
                    results[(n, p, seed)] = json.loads(path.read_text())["value"]
                else:
                    pending.append(task)
                    keys.append((key, path, (n, p, seed)))
    for (key, path, ident), row in zip(keys, _map(simulate_point, pending, workers)):
        path.parent.mkdir(parents=True, exist_ok=True)
        _dump(path, {"key": key, "value": row})
        results[ident] = row
        computed += 1

    rows = [results[k] for k in sorted(results)]
    write_csv(out / "runs.csv", rows, [c for c in RUN_COLUMNS if any(c in r for r in rows)])

    summary = []
    for n in cfg.sizes:
        for p in cfg.p_values:
            probs = [results[(n, p, s)]["success_prob"] for s in cfg.seeds]
            st = summarize(probs)
            summary.append({"n": n, "p": p, "delta_beta": deltas[(n, p)][0],
                            "delta_gamma": deltas[(n, p)][1], "median": st["median"],
                            "q1": st["q1"], "q3": st["q3"], "mean": st["mean"],
                            "count": st["count"]})
    write_csv(out / "summary.csv", summary)

    scaling = {}
    if len(set(cfg.sizes)) >= 2:
        n_min = min(cfg.sizes)
        for p in cfg.p_values:
            pts = [(n, results[(n, p, s)]["success_prob"]) for n in cfg.sizes for s in cfg.seeds]
            try:
                scaling[str(p)] = fit_scaling(pts, n_q_min=n_min).to_dict()
            except ParameterError as exc:
                scaling[str(p)] = {"error": str(exc)}
    _dump(out / "scaling.json", scaling)
    log.info("experiment finished: %d new computations", computed)
    (out / ".computed").write_text(str(computed))
    return out


def last_computed(out) -> int:
    return int((Path(out) / ".computed").read_text())


# ---------------------------------------------------------------------------
# solver comparison


@dataclass
class CompareConfig:
    sizes: list = field(default_factory=lambda: [10, 12, 14])
    instances: int = 100
    hard: int = 20
    sweeps: int = 200
    reads: int = 100
    tabu_iterations: int | None = None
    p: int | str = "n"  # "n" means p = N_q
    delta: list = field(default_factory=lambda: [0.5, 0.5])
    t_2q: float = baselines.DEFAULT_T2Q
    p_d: float = baselines.DEFAULT_PD
    unit: str = "work"
    seed: int = 0
    output_dir: str = "compare"

    @classmethod
    def from_dict(cls, data: dict) -> "CompareConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def fit_exponent(sizes, tts_values) -> tuple[float, float]:
    """Slope and intercept of ``log2(TTS)`` against ``N_q``; infinite values are skipped."""
    pts = [(n, t) for n, t in zip(sizes, tts_values) if np.isfinite(t) and t > 0]
    if len({n for n, _ in pts}) < 2:
        return float("nan"), float("nan")
    return loglinear_fit([n for n, _ in pts], np.log2([t for _, t in pts]))


def compare_solvers(cfg: CompareConfig, *, out: str | Path | None = None,
                    external: Iterable[dict] = ()) -> dict:
    """TTS scaling of SA, tabu and LR-QAOA on the hardest FC-WMaxcut instances per size.

    ``external`` rows (``solver, n, instance, tts``) from outside solvers are
    merged into the per-size statistics and exponent fits.
    """
    out = Path(out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for n in cfg.sizes:
        insts = [generate(Family.FC_WMAXCUT, n, cfg.seed * 100_003 + i) for i in range(cfg.instances)]
        truths = [brute_force(i.model) for i in insts]
        sa_cfg = baselines.AnnealConfig(cfg.sweeps, cfg.reads, seed=cfg.seed)
        tb_cfg = baselines.TabuConfig(cfg.tabu_iterations, None, cfg.reads, cfg.seed)
        reports: list = []
        sel = baselines.select_hard_instances([i.model for i in insts], truths, sa_cfg,
                                              min(cfg.hard, len(insts)), tb_cfg, unit=cfg.unit,
                                              reports=reports)
        p = n if cfg.p == "n" else int(cfg.p)
        sched = build_schedule(cfg.delta[0], cfg.delta[1], p)
        for idx in sel.selected:
            _, sa, tb = reports[idx]
            state, _ = run(insts[idx].model, sched)
            q = success_probability(state, truths[idx])
            q_tts = baselines.lr_qaoa_tts(q, n, p, cfg.t_2q, cfg.p_d)
            q_work = baselines.tts(q, (2 * n + 2) * p, cfg.p_d)
            for solver, rep in (("sa", sa), ("tabu", tb)):
                rows.append({"solver": solver, "n": n, "instance": idx,
                             "success_prob": rep.success_prob,
                             "tts": rep.tts_work(cfg.p_d) if cfg.unit == "work"
                             else rep.tts_seconds(cfg.p_d),
                             "tts_seconds": rep.tts_seconds(cfg.p_d)})
            rows.append({"solver": "lrqaoa", "n": n, "instance": idx, "success_prob": q,
                         "tts": q_work if cfg.unit == "work" else q_tts, "tts_seconds": q_tts})
        rows.append({"solver": "_pcc", "n": n, "instance": -1, "success_prob": sel.pcc,
                     "tts": float("nan"), "tts_seconds": float("nan")})
    for r in external:
        rows.append({"solver": r["solver"], "n": int(r["n"]), "instance": r.get("instance", ""),
                     "success_prob": float("nan"), "tts": float(r["tts"]),
                     "tts_seconds": float(r.get("tts_seconds", "nan") or "nan")})
    write_csv(out / "compare_runs.csv", rows,
              ["solver", "n", "instance", "success_prob", "tts", "tts_seconds"])
    report = summarize_comparison(rows)
    _dump(out / "compare.json", report)
    return report


def summarize_comparison(rows: list[dict]) -> dict:
    """Per-solver, per-size median/Q1/Q3 of TTS and the fitted ``log2 TTS`` slope."""
    report: dict = {"solvers": {}, "pcc": {}}
    for r in rows:
        if r["solver"] == "_pcc":
            report["pcc"][str(r["n"])] = r["success_prob"]
    solvers = sorted({r["solver"] for r in rows if r["solver"] != "_pcc"})
    for s in solvers:
        per = {}
        for n in sorted({r["n"] for r in rows if r["solver"] == s}):
            vals = np.array([r["tts"] for r in rows if r["solver"] == s and r["n"] == n])
            finite = vals[np.isfinite(vals)]
            per[str(n)] = {
                "median": float(np.median(vals)) if vals.size else math.nan,
                "q1": float(np.quantile(vals, 0.25)) if vals.size else math.nan,
                "q3": float(np.quantile(vals, 0.75)) if vals.size else math.nan,
                "finite": int(finite.size), "count": int(vals.size),
            }
        sizes = [int(n) for n in per]
        slope, intercept = fit_exponent(sizes, [per[str(n)]["median"] for n in sizes])
        report["solvers"][s] = {"per_size": per, "exponent": slope, "intercept": intercept}
    return report


__all__ = [
    "CompareConfig", "ExperimentConfig", "best_cell", "compare_solvers", "content_hash",
    "fit_exponent", "heatmap_matrix", "max_cut_value", "ridge_connected", "run_experiment",
    "scan_performance_diagram", "simulate_point", "summarize_comparison", "SCAN_MAX",
]
