"""Tabulate how kappa and the rate constants scale with dimension and rho.

Writes constants.csv under --outdir; with --plot it renders kappa and
beta1 against n, one line per rho, on a log axis.  Rows whose
exponentials overflow stay in the table with empty beta cells.
"""

import argparse
import csv
import io
import sys
from collections import defaultdict
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
    parser.add_argument("--rho-values", default="0.1,1,10")
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    out = args.outdir / "constants.csv"
    code = run_quiet(["constants", "--rho-values", args.rho_values, "--out", str(out)])
    if code or not args.plot:
        return code

    try:
        import matplotlib
    except ImportError:
        sys.exit("--plot needs matplotlib (pip install matplotlib), "
                 "or rerun without --plot and use constants.csv directly")
    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    with open(out, newline="") as handle:
        rows = list(csv.DictReader(line for line in handle if not line.startswith("#")))
    by_rho = defaultdict(list)
    for row in rows:
        by_rho[row["rho"]].append(row)

    fig, (ax_k, ax_b) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    for rho, group in sorted(by_rho.items(), key=lambda kv: float(kv[0])):
        ns = [int(r["n"]) for r in group]
        ax_k.plot(ns, [float(r["kappa"]) for r in group], marker="o",
                  label=f"rho={rho}")
        finite = [(int(r["n"]), float(r["beta1"])) for r in group if r["beta1"]]
        if finite:
            ax_b.plot(*zip(*finite), marker="s", label=f"rho={rho}")
    for ax, ylabel in ((ax_k, "kappa"), (ax_b, "beta1 (where finite)")):
        ax.set_yscale("log")
        ax.set_xlabel("dimension n")
        ax.set_ylabel(ylabel)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    png = args.outdir / "constants.png"
    fig.savefig(png, dpi=150)
    print(f"wrote {png}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
