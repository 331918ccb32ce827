"""Success probability versus size and depth, with the exponential fit per depth.

    python scripts/scaling.py --sizes 10 12 14 16 --seeds 20 --p 10 50 100 --out results/scaling
"""

import argparse
import json

from lrqaoa.experiment import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="wmaxcut")
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 12, 14, 16])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--p", type=int, nargs="+", default=[10, 50, 100])
    ap.add_argument("--fixed", type=float, nargs=2, metavar=("DB", "DG"),
                    help="skip the per-size scan and use these deltas")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/scaling")
    args = ap.parse_args()

    policy = {"fixed": args.fixed} if args.fixed else {"scan": {}}
    cfg = ExperimentConfig(family=args.family, sizes=args.sizes, seeds=list(range(args.seeds)),
                           p_values=args.p, delta_policy=policy, output_dir=args.out)
    out = run_experiment(cfg, workers=args.workers)
    fits = json.loads((out / "scaling.json").read_text())
    for p, fit in sorted(fits.items(), key=lambda kv: int(kv[0])):
        if "eta" in fit:
            print(f"p={p:>4}  eta={fit['eta']:.4f}  C={fit['c']:.3f}")
        else:
            print(f"p={p:>4}  {fit['error']}")
    print(out / "summary.csv")


if __name__ == "__main__":
    main()
