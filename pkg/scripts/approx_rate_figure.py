"""Measure the certified sup-norm approximation error as width grows.

Writes approx_rate.csv under --outdir (30 feature draws per width by
default, so expect a few minutes).  With --plot it shows the median
error against m on log-log axes next to an m^{-1/2} reference line and
the probabilistic width bound.
"""

import argparse
import csv
import io
import statistics
import sys
from contextlib import redirect_stdout
from pathlib import Path

from rfdiv.cli import main as rfdiv


def run_quiet(argv: list[str]) -> int:
    """Invoke the CLI with its stdout table suppressed; files still land."""
    with redirect_stdout(io.StringIO()):
        return rfdiv(argv)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    parser.add_argument("--trials", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=4)
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    out = args.outdir / "approx_rate.csv"
    code = run_quiet(["verify-approx", "--trials", str(args.trials),
                  "--seed", str(args.seed), "--jobs", str(args.jobs),
                  "--out", str(out)])
    if code or not args.plot:
        return code

    try:
        import matplotlib
    except ImportError:
        sys.exit("--plot needs matplotlib (pip install matplotlib), "
                 "or rerun without --plot and use approx_rate.csv directly")
    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    with open(out, newline="") as handle:
        rows = list(csv.DictReader(line for line in handle if not line.startswith("#")))
    widths = sorted({int(r["m"]) for r in rows})
    medians = [statistics.median(float(r["linf_error"]) for r in rows
                                 if int(r["m"]) == m) for m in widths]
    bounds = [next(float(r["prop1_bound"]) for r in rows if int(r["m"]) == m)
              for m in widths]

    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot(widths, medians, marker="o", label="median certified error")
    ax.plot(widths, bounds, linestyle=":", label="width bound (delta=0.1)")
    anchor = medians[0] * (widths[0] ** 0.5)
    ax.plot(widths, [anchor / m ** 0.5 for m in widths], linestyle="--",
            label="m^{-1/2} reference")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("network width m")
    ax.set_ylabel("sup-norm error on the unit ball")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    png = args.outdir / "approx_rate.png"
    fig.savefig(png, dpi=150)
    print(f"wrote {png}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
