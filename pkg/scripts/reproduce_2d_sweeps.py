"""Reproduce the 2D benchmark sweeps: error vs training steps and vs width.

Writes vary_T.csv / vary_T_summary.csv and vary_m.csv / vary_m_summary.csv
under --outdir.  With --plot (needs matplotlib, not a package dependency)
it also renders the two summary tables as log-log error plots.
"""

import argparse
import csv
import io
import sys
from contextlib import redirect_stdout
from pathlib import Path

from rfdiv.cli import main as rfdiv


def run_quiet(argv: list[str]) -> int:
    """Invoke the CLI with its stdout table suppressed; files still land."""
    with redirect_stdout(io.StringIO()):
        return rfdiv(argv)

T_VALUES = "10000,100000,1000000"
M_VALUES = "10,50,200"


def read_summary(path: Path) -> list[dict]:
    with open(path, newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


def load_pyplot():
    try:
        import matplotlib
    except ImportError:
        sys.exit("--plot needs matplotlib (pip install matplotlib), "
                 "or rerun without --plot and use the CSVs directly")
    matplotlib.use("Agg")
    from matplotlib import pyplot as plt
    return plt


def plot_summary(plt, path: Path, xlabel: str, png: Path) -> None:
    rows = read_summary(path)
    x = [float(r["value"]) for r in rows]
    med = [float(r["median_err"]) for r in rows]
    se = [float(r["std_err_of_mean"]) for r in rows]
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.errorbar(x, med, yerr=se, marker="o", capsize=3)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("median |kl_hat - kl_true|")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(png, dpi=150)
    print(f"wrote {png}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=4)
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    common = ["--trials", str(args.trials), "--seed", str(args.seed),
              "--jobs", str(args.jobs)]
    code = run_quiet(["sweep", "--param", "T", "--values", T_VALUES, "--m", "50",
                  *common, "--out", str(args.outdir / "vary_T.csv")])
    if code:
        return code
    code = run_quiet(["sweep", "--param", "m", "--values", M_VALUES, "--T", "500000",
                  *common, "--out", str(args.outdir / "vary_m.csv")])
    if code:
        return code

    if args.plot:
        plt = load_pyplot()
        plot_summary(plt, args.outdir / "vary_T_summary.csv",
                     "training steps T", args.outdir / "vary_T.png")
        plot_summary(plt, args.outdir / "vary_m_summary.csv",
                     "network width m", args.outdir / "vary_m.png")
    return 0


if __name__ == "__main__":
    sys.exit(main())
