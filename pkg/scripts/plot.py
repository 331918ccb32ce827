"""Plot CSVs written by the other scripts and the CLI (needs matplotlib).

    python scripts/plot.py summary results/scaling/summary.csv
    python scripts/plot.py heatmap heatmap.csv
    python scripts/plot.py noise noise_collapse.csv
    python scripts/plot.py injection x_injection.csv
"""

import argparse
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from lrqaoa.experiment import heatmap_matrix, read_csv  # noqa: E402


def plot_summary(rows, ax):
    by_p = defaultdict(list)
    for r in rows:
        by_p[int(r["p"])].append((int(r["n"]), float(r["median"]), float(r["q1"]), float(r["q3"])))
    for p, pts in sorted(by_p.items()):
        n, med, q1, q3 = map(np.array, zip(*sorted(pts)))
        ax.plot(n, med, "o-", label=f"p={p}")
        ax.fill_between(n, q1, q3, alpha=0.2)
    ax.set_yscale("log")
    ax.set_xlabel("qubits")
    ax.set_ylabel("success probability")
    ax.legend()


def plot_heatmap(rows, ax):
    rows = [{k: float(v) for k, v in r.items()} for r in rows]
    b, g, m = heatmap_matrix(rows)
    im = ax.imshow(m, origin="lower", aspect="auto", extent=[g[0], g[-1], b[0], b[-1]])
    plt.colorbar(im, ax=ax, label="success probability")
    ax.set_xlabel("delta_gamma")
    ax.set_ylabel("delta_beta")


def plot_noise(rows, ax):
    eps = np.array([float(r["eps_acc"]) for r in rows])
    povl = np.array([float(r["p_ovl"]) for r in rows])
    ok = np.isfinite(povl) & (povl > 0)
    ax.scatter(eps[ok], povl[ok], s=12)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("accumulated error")
    ax.set_ylabel("overlap probability")


def plot_injection(rows, ax):
    t = [int(r["layer"]) for r in rows]
    ax.plot(t, [float(r["clean"]) for r in rows], label="no injection")
    ax.plot(t, [float(r["injected"]) for r in rows], label="X injected")
    ax.set_xlabel("layer")
    ax.set_ylabel("ground-state probability")
    ax.legend()


KINDS = {"summary": plot_summary, "heatmap": plot_heatmap, "noise": plot_noise,
         "injection": plot_injection}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("kind", choices=sorted(KINDS))
    ap.add_argument("csv")
    ap.add_argument("--out", help="image path (default: CSV name with .png)")
    args = ap.parse_args()
    fig, ax = plt.subplots(figsize=(5, 4))
    KINDS[args.kind](read_csv(args.csv), ax)
    fig.tight_layout()
    out = args.out or args.csv.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
