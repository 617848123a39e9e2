#!/usr/bin/env python3
"""Plot |q(x, t)| from a `quatnls sample` CSV.

Usage: plot_sample.py sample.csv [out.png]

With matplotlib installed, writes a line plot of |q| over x (one line per
t slice, or a pcolormesh for dense t grids). Without matplotlib, prints a
coarse ASCII profile of the first t slice instead.
"""
import csv
import sys
from collections import defaultdict


def load(path):
    slices = defaultdict(list)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                slices[float(row["t"])].append(
                    (float(row["x"]), float(row["abs_q"]))
                )
            except ValueError:
                continue  # nan rows at singular points
    return {t: sorted(v) for t, v in sorted(slices.items())}


def ascii_profile(xs, ys, width=72, height=16):
    lo, hi = min(ys), max(ys)
    span = (hi - lo) or 1.0
    step = max(1, len(xs) // width)
    cols = [(x, y) for x, y in zip(xs[::step], ys[::step])]
    grid = [[" "] * len(cols) for _ in range(height)]
    for i, (_, y) in enumerate(cols):
        r = int((y - lo) / span * (height - 1))
        grid[height - 1 - r][i] = "*"
    print(f"|q| in [{lo:.4g}, {hi:.4g}], x in [{xs[0]:.4g}, {xs[-1]:.4g}]")
    for line in grid:
        print("".join(line))


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    slices = load(sys.argv[1])
    if not slices:
        sys.exit("no parsable rows found")
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        t0 = next(iter(slices))
        xs, ys = zip(*slices[t0])
        print(f"matplotlib not found; ASCII profile at t = {t0:g}")
        ascii_profile(xs, ys)
        return

    out = sys.argv[2] if len(sys.argv) > 2 else "sample.png"
    fig, ax = plt.subplots(figsize=(8, 5))
    if len(slices) > 8:
        ts = sorted(slices)
        xs = [x for x, _ in slices[ts[0]]]
        grid = [[y for _, y in slices[t]] for t in ts]
        mesh = ax.pcolormesh(xs, ts, grid, shading="auto")
        fig.colorbar(mesh, ax=ax, label="|q|")
        ax.set_ylabel("t")
    else:
        for t, pts in slices.items():
            xs, ys = zip(*pts)
            ax.plot(xs, ys, label=f"t = {t:g}")
        ax.legend()
        ax.set_ylabel("|q|")
    ax.set_xlabel("x")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
