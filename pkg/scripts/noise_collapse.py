"""Overlap probability versus accumulated error for small WMaxcut instances and the k0 fit."""

import argparse

from lrqaoa.experiment import write_csv
from lrqaoa.ising import brute_force
from lrqaoa.noise import DEFAULT_MIN_POVL, fit_noise_model, gate_budget, noise_sweep
from lrqaoa.problems import gen_wmaxcut


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--densities", type=float, nargs="+", default=[0.4, 0.7, 1.0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p", type=int, nargs="+", default=[10, 20, 40])
    ap.add_argument("--lambdas", type=float, nargs="+", default=[1e-4, 1e-3, 1e-2, 1e-1])
    ap.add_argument("--backend", default="density")
    ap.add_argument("--min-povl", type=float, default=DEFAULT_MIN_POVL)
    ap.add_argument("--out", default="noise_collapse.csv")
    args = ap.parse_args()

    rows = []
    for d in args.densities:
        inst = gen_wmaxcut(args.n, d, args.seed)
        truth = brute_force(inst.model)
        for r in noise_sweep(inst.model, truth, 0.3, 0.6, args.p, args.lambdas, backend=args.backend):
            rows.append({"edge_density": d, **r})
    write_csv(args.out, rows)
    fit = fit_noise_model([(r["n_gates"], r["lambda"], r["p_ovl"]) for r in rows],
                          min_povl=args.min_povl)
    print(f"k0 = {fit.k0:.3f}  R^2 = {fit.r_squared:.4f}  points = {len(fit.points)}")
    for lam in (25e-4, 2.5e-4):
        print(f"gate budget at lambda={lam:g}, p_ovl=0.1: {gate_budget(lam, 0.1, fit.k0):.0f}")
    print(args.out)


if __name__ == "__main__":
    main()
