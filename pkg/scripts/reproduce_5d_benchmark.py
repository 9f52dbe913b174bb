"""Run the 2D and 5D benchmark estimates back to back and print both medians.

The 5D problem keeps the same truncated-Gaussian-vs-uniform pair on the
[-2, 2] box, with width 100 and 10^6 steps.  CSVs and JSON reports land
under --outdir.
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


def median_error(path: Path) -> float:
    with open(path, newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return statistics.median(float(row["abs_err"]) for row in csv.DictReader(lines))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=4)
    args = parser.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    common = ["--trials", str(args.trials), "--seed", str(args.seed),
              "--jobs", str(args.jobs)]
    runs = [
        ("bench_2d.csv", ["estimate", *common]),
        ("bench_5d.csv", ["estimate", "--dim", "5", "--m", "100",
                          "--T", "1000000", *common]),
    ]
    for name, argv in runs:
        out = args.outdir / name
        code = run_quiet(argv + ["--out", str(out)])
        if code:
            return code
        print(f"{name}: median abs err {median_error(out):.4g} "
              f"over {args.trials} trials")
    return 0


if __name__ == "__main__":
    sys.exit(main())
