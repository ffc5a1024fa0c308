#!/usr/bin/env python3
"""Plot the toy inverse-problem trajectories written by `aesop seve-lab`.

Reads toy_pixel.csv and toy_aesop.csv (columns step, mean_error, std, loss)
and draws mean error and sample std per step for both objectives.
"""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("run_dir", type=Path, help="seve-lab --out directory")
    parser.add_argument("--output", type=Path, default=None, help="PNG path (default: <run_dir>/toy.png)")
    args = parser.parse_args()

    fig, (ax_err, ax_std) = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    for name, label in (("toy_pixel.csv", "pixel loss"), ("toy_aesop.csv", "AESOP loss")):
        df = pd.read_csv(args.run_dir / name)
        ax_err.plot(df["step"], df["mean_error"], label=label)
        ax_std.plot(df["step"], df["std"], label=label)
    ax_err.axhline(0.0, color="gray", linewidth=0.5)
    ax_err.set_ylabel("mean error")
    ax_std.set_ylabel("sample std")
    for ax in (ax_err, ax_std):
        ax.set_xlabel("step")
        ax.legend()
    fig.tight_layout()
    out = args.output or args.run_dir / "toy.png"
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
