#!/usr/bin/env python3
"""Plot an osmm iteration log.

Draws h - h_best, the gap h - L and the RMS residual against iteration and
against wall time, one panel per quantity and axis.

    python3 plot_run.py out/iterations.csv -o out/convergence.png
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv", help="iterations.csv written by `osmm run`")
    parser.add_argument("-o", "--output", default="convergence.png")
    args = parser.parse_args()

    df = pd.read_csv(args.csv)
    h_best = min(df["h"].min(), df["lower_bound"].replace(float("-inf"), float("nan")).max())
    series = {
        "suboptimality  h - h_best": (df["h"] - h_best).clip(lower=1e-16),
        "gap  h - L": df["gap"].where(df["gap"] < float("inf")),
        "RMS residual": df["rms_residual"],
    }

    fig, axes = plt.subplots(2, 3, figsize=(13, 7), sharey="col")
    for col, (label, values) in enumerate(series.items()):
        for row, x in enumerate(("iter", "time_s")):
            ax = axes[row][col]
            ax.semilogy(df[x], values, marker=".", linewidth=1)
            ax.set_xlabel("iteration" if x == "iter" else "time (s)")
            ax.set_title(label)
            ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
