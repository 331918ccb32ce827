"""Time-to-solution scaling of SA, tabu and LR-QAOA on the hardest instances per size."""

import argparse
import json

from lrqaoa.experiment import CompareConfig, compare_solvers, read_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 12, 14, 16, 18])
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--hard", type=int, default=20)
    ap.add_argument("--sweeps", type=int, default=200)
    ap.add_argument("--reads", type=int, default=100)
    ap.add_argument("--unit", choices=["work", "seconds"], default="work")
    ap.add_argument("--external", nargs="*", default=[])
    ap.add_argument("--out", default="results/compare")
    args = ap.parse_args()

    cfg = CompareConfig(sizes=args.sizes, instances=args.instances, hard=args.hard,
                        sweeps=args.sweeps, reads=args.reads, unit=args.unit, output_dir=args.out)
    external = [row for path in args.external for row in read_csv(path)]
    report = compare_solvers(cfg, external=external)
    for name, s in sorted(report["solvers"].items()):
        print(f"{name:>8}: TTS ~ 2^({s['exponent']:.3f} N)")
    print(json.dumps(report["pcc"], indent=1))


if __name__ == "__main__":
    main()
