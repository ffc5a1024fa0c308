#!/usr/bin/env python3
"""Plot a perception-distortion curve from pd_curve.csv (`aesop diagnose`).

One point per checkpoint: PSNR on x, proxy perception on y (lower is better).
"""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", type=Path, nargs="+", help="one or more pd_curve.csv files")
    parser.add_argument("--output", type=Path, default=Path("pd_curve.png"))
    args = parser.parse_args()

    fig, ax = plt.subplots(figsize=(5, 4))
    for path in args.csv:
        df = pd.read_csv(path).sort_values("step")
        ax.plot(df["psnr"], df["proxy_perception"], marker="o", label=path.parent.name or str(path))
    ax.set_xlabel("PSNR [dB]")
    ax.set_ylabel("proxy perception")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(args.output)


if __name__ == "__main__":
    main()
