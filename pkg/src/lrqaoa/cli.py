"""Command-line entry point: ``lrqaoa <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 resource-cap error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import baselines, experiment, noise
from .errors import CapacityError, ParameterError, UndefinedMetricError
from .ising import brute_force
from .metrics import (
    SampleSet,
    approximation_ratio,
    fit_scaling,
    mitigate_hd1,
    random_samples,
    success_probability_sampled,
)
from .problems import CUT_FAMILIES, Family, generate, load_instance, save_instance
from .schedule import DEFAULT_DELTA_BETA, DEFAULT_DELTA_GAMMA, SCAN_MAX, build_schedule, delta_grid
from .simulator import EnergyTable, expected_energy, run, sample, success_probability

EXIT_OK, EXIT_CONFIG, EXIT_CAP = 0, 2, 3

log = logging.getLogger("lrqaoa")


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")
    print(path)


def _parse_params(items) -> dict:
    params = {}
    for item in items or ():
        if "=" not in item:
            raise ParameterError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            params[k] = json.loads(v)
        except json.JSONDecodeError:
            params[k] = v
    return params


def _load(path):
    try:
        inst = load_instance(path)
    except FileNotFoundError as exc:
        raise ParameterError(f"instance file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParameterError(f"malformed instance file {path}: {exc}") from exc
    return inst


def _max_cut(inst, truth):
    if inst.family in CUT_FAMILIES and inst.edges:
        return (inst.total_weight - inst.scale * truth.optimal_energy) / 2
    return None


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    inst = generate(args.family, args.n, args.seed, **_parse_params(args.param))
    name = args.name or f"{Family(args.family).value}_n{args.n}_s{args.seed}.json"
    path = _out(args) / name
    save_instance(inst, path)
    print(path)
    return EXIT_OK


def cmd_run(args) -> int:
    if args.config:
        cfg = experiment.ExperimentConfig.from_json(args.config)
        out = experiment.run_experiment(cfg, workers=args.workers,
                                        out=args.out if args.out != "." else None)
        print(out / "runs.csv")
        return EXIT_OK
    if not args.instance:
        raise ParameterError("run needs --instance or --config")
    inst = _load(args.instance)
    table = EnergyTable.from_model(inst.model)
    truth = brute_force(inst.model, table=table.energies)
    sched = build_schedule(args.delta_beta, args.delta_gamma, args.p)
    injections = [(t, "X") for t in args.inject_x_at or ()]
    state, record = run(inst.model, sched, record_trajectory=args.record_trajectory,
                        gate_injections=injections, table=table)
    res = {"instance": str(args.instance), "schedule": sched.to_dict(),
           "injections": injections,
           "success_prob": success_probability(state, truth),
           "mean_energy": expected_energy(state, table),
           "random_prob": truth.degeneracy / 2.0 ** truth.num_vars,
           "optimal_energy": truth.optimal_energy,
           "optimal_bitstrings": sorted(truth.optimal_bitstrings)}
    mc = _max_cut(inst, truth)
    if mc:
        res["approx_ratio"] = ((inst.total_weight - inst.scale * res["mean_energy"]) / 2) / mc
    if args.shots:
        samples = sample(state, args.shots, args.seed, inst.model)
        res["samples"] = dict(samples.entries())
        res["sampled_success"] = success_probability_sampled(samples, truth)
        if mc:
            res["sampled_approx_ratio"] = approximation_ratio(samples, inst.edges, mc)
    out = _out(args)
    if record is not None:
        experiment.write_csv(out / "trajectory.csv",
                             [{"layer": t, "energy": e, "probability": p} for t, e, p in record.rows()])
        print(out / "trajectory.csv")
    _dump(out / "result.json", res)
    return EXIT_OK


def cmd_scan(args) -> int:
    inst = _load(args.instance)
    table = EnergyTable.from_model(inst.model)
    truth = brute_force(inst.model, table=table.energies)
    steps = tuple(args.steps) if len(args.steps) == 2 else int(args.steps[0])
    grid = delta_grid(tuple(args.beta_range), tuple(args.gamma_range), steps)
    rows = experiment.scan_performance_diagram(inst.model, truth, args.p, grid, table=table)
    out = _out(args)
    experiment.write_csv(out / "heatmap.csv", rows, ["delta_beta", "delta_gamma", "prob", "mean_energy"])
    best = experiment.best_cell(rows)
    _dump(out / "scan.json", {"p": args.p, "best": best,
                              "random_prob": truth.degeneracy / 2.0 ** truth.num_vars})
    return EXIT_OK


NOISE_COLUMNS = ["p", "N_g", "lambda", "eps_acc", "p_success", "p_ideal", "p_random", "p_ovl"]


def cmd_noise_sim(args) -> int:
    inst = _load(args.instance)
    truth = brute_force(inst.model)
    rows = noise.noise_sweep(inst.model, truth, args.deltas[0], args.deltas[1], args.p,
                             args.lam, backend=args.backend, trajectories=args.trajectories,
                             seed=args.seed)
    out = _out(args)
    runs = out / "noise_runs"
    runs.mkdir(exist_ok=True)
    table = []
    for r in rows:
        r = {("N_g" if k == "n_gates" else k): v for k, v in r.items()}
        table.append(r)
        (runs / f"p{r['p']}_lam{r['lambda']!r}.json").write_text(json.dumps(r, indent=2, sort_keys=True))
    experiment.write_csv(out / "noise.csv", table, NOISE_COLUMNS)
    print(out / "noise.csv")
    return EXIT_OK


def cmd_fit_noise(args) -> int:
    points = []
    for path in args.csv:
        for r in experiment.read_csv(path):
            points.append((float(r["N_g"]), float(r["lambda"]), float(r["p_ovl"])))
    fit = noise.fit_noise_model(points, min_povl=args.min_povl)
    res = fit.to_dict()
    if args.target is not None:
        res["gate_budget"] = {repr(l): noise.gate_budget(l, args.target, fit.k0)
                              for l in sorted({p[1] for p in points if p[1] > 0})}
    _dump(_out(args) / "noise_fit.json", res)
    return EXIT_OK


def cmd_baseline(args) -> int:
    inst = _load(args.instance)
    truth = brute_force(inst.model)
    if args.solver == "sa":
        cfg = baselines.AnnealConfig(sweeps=args.sweeps, reads=args.reads, seed=args.seed)
    else:
        cfg = baselines.TabuConfig(iterations=args.iterations, reads=args.reads, seed=args.seed)
    rep = baselines.run_solver(args.solver, inst.model, truth, cfg)
    s = rep.samples
    out = _out(args)
    experiment.write_csv(out / "reads.csv", [
        {"read": i, "energy": float(e), "bits": b, "seconds": float(t)}
        for i, (e, b, t) in enumerate(zip(s.energies, s.bitstrings(), s.info["read_seconds"]))])
    print(out / "reads.csv")
    _dump(out / "baseline.json", {
        "solver": args.solver, "reads": args.reads, "success_prob": rep.success_prob,
        "best_energy": rep.best_energy, "optimal_energy": truth.optimal_energy,
        "time_per_read": rep.time_per_read, "work_per_read": rep.work_per_read,
        "p_d": args.p_d, "tts_seconds": rep.tts_seconds(args.p_d),
        "tts_work": rep.tts_work(args.p_d)})
    return EXIT_OK


def _read_samples(path, n) -> SampleSet:
    rows = experiment.read_csv(path)
    if not rows or "bits" not in rows[0]:
        raise ParameterError("sample CSV needs a 'bits' column (and optional 'count')")
    counts = {}
    for r in rows:
        b = r["bits"].strip()
        if len(b) != n:
            raise ParameterError(f"bitstring {b!r} does not have {n} bits")
        counts[b] = counts.get(b, 0) + int(r.get("count") or 1)
    return SampleSet.from_bitstrings(counts)


def cmd_mitigate(args) -> int:
    inst = _load(args.instance)
    truth = brute_force(inst.model)
    n = inst.num_vars
    if args.samples:
        samples = _read_samples(args.samples, n)
    else:
        samples = random_samples(n, args.uniform, args.seed)
    samples = samples.with_energies(inst.model)
    mit = mitigate_hd1(samples, inst.model)
    res = {"shots": samples.total_shots, "changed": mit.info["mitigated"],
           "success_before": success_probability_sampled(samples, truth),
           "success_after": success_probability_sampled(mit, truth),
           "mean_energy_before": float(samples.expanded_energies().mean()),
           "mean_energy_after": float(mit.expanded_energies().mean())}
    mc = _max_cut(inst, truth)
    if mc:
        res["approx_ratio_before"] = approximation_ratio(samples, inst.edges, mc)
        res["approx_ratio_after"] = approximation_ratio(mit, inst.edges, mc)
    out = _out(args)
    experiment.write_csv(out / "mitigated.csv", [
        {"bits": b, "count": int(c), "energy": float(e)}
        for b, c, e in zip(mit.bitstrings(), mit.counts, mit.energies)])
    print(out / "mitigated.csv")
    _dump(out / "mitigate.json", res)
    return EXIT_OK


def cmd_fit_scaling(args) -> int:
    by_p: dict[int, list] = {}
    for path in args.csv:
        for r in experiment.read_csv(path):
            by_p.setdefault(int(r["p"]), []).append((int(r["n_qubits"]), float(r["success_prob"])))
    if not by_p:
        raise ParameterError("no rows in scaling CSV")
    res = {}
    for p in sorted(by_p):
        try:
            res[str(p)] = fit_scaling(by_p[p], args.n_q_min, per_instance=args.per_instance).to_dict()
        except ParameterError as exc:
            res[str(p)] = {"error": str(exc)}
    _dump(_out(args) / "scaling_fit.json", res)
    return EXIT_OK


def cmd_tts(args) -> int:
    if args.time is not None:
        t = args.time
    elif args.n_qubits is not None and args.layers is not None:
        t = baselines.lr_qaoa_sample_time(args.n_qubits, args.layers, args.t_2q)
    else:
        raise ParameterError("tts needs --time or both --n-qubits and --layers")
    value = baselines.tts(args.success_prob, t, args.p_d)
    print(json.dumps({"success_prob": args.success_prob, "time_per_sample": t,
                      "p_d": args.p_d, "tts": value}))
    return EXIT_OK


def cmd_compare(args) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    cfg = experiment.CompareConfig.from_dict({**data, "seed": data.get("seed", args.seed)})
    external = []
    for path in args.external or ():
        external.extend(experiment.read_csv(path))
    report = experiment.compare_solvers(cfg, out=_out(args), external=external)
    print(json.dumps({s: v["exponent"] for s, v in report["solvers"].items()}, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="lrqaoa", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=".")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("generate", cmd_generate, "generate a seeded problem instance")
    p.add_argument("--family", required=True, choices=[f.value for f in Family if f is not Family.IMPORTED])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--param", action="append", help="generator parameter key=value")
    p.add_argument("--name", help="output file name")

    p = add("run", cmd_run, "simulate one instance, or a whole experiment with --config")
    p.add_argument("--instance")
    p.add_argument("--config", help="ExperimentConfig JSON")
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--delta-beta", type=float, default=DEFAULT_DELTA_BETA)
    p.add_argument("--delta-gamma", type=float, default=DEFAULT_DELTA_GAMMA)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--record-trajectory", action="store_true")
    p.add_argument("--inject-x-at", type=int, action="append", metavar="LAYER")

    p = add("scan", cmd_scan, "performance diagram over a (delta_beta, delta_gamma) grid")
    p.add_argument("--instance", required=True)
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--beta-range", type=float, nargs=2, default=[0.0, SCAN_MAX])
    p.add_argument("--gamma-range", type=float, nargs=2, default=[0.0, SCAN_MAX])
    p.add_argument("--steps", type=int, nargs="+", default=[16])

    p = add("noise-sim", cmd_noise_sim, "depolarizing-noise sweep over p and lambda")
    p.add_argument("--instance", required=True)
    p.add_argument("--p", type=int, nargs="+", default=[10])
    p.add_argument("--deltas", type=float, nargs=2, default=[DEFAULT_DELTA_BETA, DEFAULT_DELTA_GAMMA])
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", default=[1e-3])
    p.add_argument("--backend", choices=[b.value for b in noise.Backend], default="density")
    p.add_argument("--trajectories", type=int, default=1000)

    p = add("fit-noise", cmd_fit_noise, "fit k0 from noise-sim CSVs")
    p.add_argument("--csv", nargs="+", required=True)
    p.add_argument("--min-povl", type=float, default=noise.DEFAULT_MIN_POVL)
    p.add_argument("--target", type=float, help="report gate budgets for this overlap target")

    p = add("baseline", cmd_baseline, "simulated annealing or tabu search")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", choices=["sa", "tabu"], default="sa")
    p.add_argument("--sweeps", type=int, default=200)
    p.add_argument("--iterations", type=int)
    p.add_argument("--reads", type=int, default=100)
    p.add_argument("--p-d", type=float, default=baselines.DEFAULT_PD)

    p = add("mitigate", cmd_mitigate, "Hamming-distance-1 post-processing")
    p.add_argument("--instance", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--samples", help="CSV with bits[,count]")
    src.add_argument("--uniform", type=int, metavar="SHOTS", help="mitigate uniform random samples")

    p = add("fit-scaling", cmd_fit_scaling, "fit prob = 2**(-eta N + C) per p")
    p.add_argument("--csv", nargs="+", required=True)
    p.add_argument("--n-q-min", type=int, default=10)
    p.add_argument("--per-instance", action="store_true")

    p = add("tts", cmd_tts, "time to solution")
    p.add_argument("--success-prob", type=float, required=True)
    p.add_argument("--time", type=float, help="time per sample")
    p.add_argument("--n-qubits", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--t-2q", type=float, default=baselines.DEFAULT_T2Q)
    p.add_argument("--p-d", type=float, default=baselines.DEFAULT_PD)

    p = add("compare", cmd_compare, "SA / tabu / LR-QAOA TTS scaling on hard instances")
    p.add_argument("--config", help="CompareConfig JSON")
    p.add_argument("--external", nargs="+", help="CSV rows solver,n,instance,tts from other solvers")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ParameterError, UndefinedMetricError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
