"""Experiment harness for the divergence estimator.

Subcommands:

* ``estimate``      -- train on the truncated-Gaussian-vs-uniform pair and
  report per-trial KL estimates next to the quadrature truth.
* ``sweep``         -- the same study repeated over a list of m or T values,
  with a per-value summary table (median, mean, standard error).
* ``mi``            -- mutual information of a correlated truncated Gaussian
  from paired samples, against the tensor-quadrature truth.
* ``constants``     -- tabulate kappa and the rate constants beta1/beta2
  over a grid of (n, rho).
* ``verify-approx`` -- sample random-feature approximants of a catalog
  function and record certified sup-norm errors next to their theoretical
  ceiling.
* ``baseline``      -- the k-NN divergence estimator on the same pair, with
  the same row schema as ``estimate`` for side-by-side tables.

Settings come from an optional flat config file (``key = value`` per line,
``#`` comments, same keys as the long flags with underscores) overridden by
command-line flags.  Every emitted file starts with a comment line holding
the resolved configuration and the tool version, so a run can be replayed
from its own output.  Trials are independent: the RNG stream of trial k is
derived from the pair (master seed, k), which makes the records identical
whether trials run sequentially or under ``--jobs N``.  Timing never enters
CSV output (it goes to the JSON report) so reruns are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .approx_verify import (
    RepresentationDensity,
    approximation_trial,
    build_representation,
    gaussian_pair_spectrum,
    gaussian_spectrum,
)
from .baseline import KnnConfig, knn_kl
from .constants import c_theta, constants_grid, schedule, theorem_bound
from .distributions import (
    CorrelatedGaussianBox,
    DistributionPair,
    exact_kl,
    mutual_information_truth,
)
from .errors import (
    ConfigError,
    DomainViolation,
    InvalidArgument,
    NumericalFailure,
    QuadratureFailure,
)
from .estimator import dv_estimate, mi_estimate
from .features import sample_feature_map
from .optimizer import TrainConfig, run

_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# fixed centers of the two-lobe catalog function for `verify-approx`
_MIX_C1 = (0.4, 0.2)
_MIX_C2 = (-0.3, 0.1)

RUN_CSV_COLUMNS = ("trial", "n", "m", "T", "seed", "kl_hat", "kl_true",
                   "abs_err", "schedule_kind")
SWEEP_CSV_COLUMNS = ("param", "value", "median_err", "mean_err",
                     "std_err_of_mean", "trials")


@dataclass(frozen=True)
class RunRecord:
    """One trial: configuration, estimate, truth, and timing."""

    trial: int
    n: int
    m: int
    T: int
    seed: int
    kl_hat: float
    kl_true: float
    abs_err: float
    runtime_ms: float
    schedule_kind: str

    def __post_init__(self):
        if self.abs_err != abs(self.kl_hat - self.kl_true):
            raise InvalidArgument(
                f"abs_err {self.abs_err!r} is not |kl_hat - kl_true|"
            )
        if not (self.runtime_ms >= 0.0):
            raise InvalidArgument(f"runtime_ms must be >= 0, got {self.runtime_ms!r}")


@dataclass(frozen=True)
class SweepSummary:
    """Per-value error statistics across the trials of one sweep point."""

    param: str
    value: int
    median_err: float
    mean_err: float
    std_err_of_mean: float
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidArgument(f"trials must be >= 1, got {self.trials}")
        if not (self.std_err_of_mean >= 0.0):
            raise InvalidArgument(
                f"std_err_of_mean must be >= 0, got {self.std_err_of_mean!r}"
            )


# --- settings schema ---------------------------------------------------------

class _BadValue(argparse.ArgumentTypeError, ValueError):
    """argparse prints ArgumentTypeError text verbatim; config parsing catches ValueError."""


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise _BadValue(f"expected a number, got {text!r}") from None


def _parse_int(text: str) -> int:
    text = text.strip()
    try:
        return int(text, 10)
    except ValueError:
        pass
    try:
        value = float(text)  # accepts 5e5
    except ValueError:
        value = math.nan
    if not value.is_integer():
        raise _BadValue(f"expected an integer, got {text!r}")
    return int(value)


def _positive_int(text: str) -> int:
    value = _parse_int(text)
    if value < 1:
        raise _BadValue(f"expected a positive integer, got {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    value = _parse_int(text)
    if value < 0:
        raise _BadValue(f"expected a nonnegative integer, got {text!r}")
    return value


def _positive_float(text: str) -> float:
    value = _float(text)
    if not (value > 0 and math.isfinite(value)):
        raise _BadValue(f"expected a positive number, got {text!r}")
    return value


def _unit_open_float(text: str) -> float:
    value = _float(text)
    if not (0.0 < value < 1.0):
        raise _BadValue(f"expected a number in (0, 1), got {text!r}")
    return value


def _fraction(text: str) -> float:
    value = _float(text)
    if not (0.0 <= value <= 1.0):
        raise _BadValue(f"expected a number in [0, 1], got {text!r}")
    return value


def _plain_float(text: str) -> float:
    value = _float(text)
    if not math.isfinite(value):
        raise _BadValue(f"expected a finite number, got {text!r}")
    return value


def _int_list(text: str) -> list[int]:
    items = [piece for piece in text.split(",") if piece.strip()]
    if not items:
        raise _BadValue("expected a comma-separated list of integers")
    return [_positive_int(piece) for piece in items]


def _float_list(text: str) -> list[float]:
    items = [piece for piece in text.split(",") if piece.strip()]
    if not items:
        raise _BadValue("expected a comma-separated list of numbers")
    return [_positive_float(piece) for piece in items]


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        text = text.strip()
        if text not in options:
            raise _BadValue(f"expected one of {', '.join(options)}; got {text!r}")
        return text

    parse.__name__ = "|".join(options)
    return parse


@dataclass(frozen=True)
class _Param:
    name: str
    parse: Callable[[str], object]
    default: object
    help: str
    required: bool = False
    file_settable: bool = True

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


def _config_param() -> _Param:
    return _Param("config", str, None, "flat key = value settings file; "
                  "flags override its entries", file_settable=False)


def _out_param() -> _Param:
    return _Param("out", str, None, "output CSV path (stdout always gets the table)")


def _jobs_param() -> _Param:
    return _Param("jobs", _positive_int, 1, "worker processes for trial-level parallelism")


def _seed_param() -> _Param:
    return _Param("seed", _nonneg_int, 0, "master seed; trial k uses the stream (seed, k)")


def _run_params() -> list[_Param]:
    return [
        _config_param(),
        _Param("dim", _positive_int, 2, "dimension of the test pair"),
        _Param("half_width", _positive_float, 2.0, "box half-width a of the support [-a, a]^n"),
        _Param("m", _positive_int, 50, "network width"),
        _Param("T", _positive_int, 500_000, "training steps"),
        _Param("trials", _positive_int, 10, "independent repetitions"),
        _Param("eval_samples", _positive_int, 5000, "held-out sample count per side"),
        _Param("schedule", _choice("experiment", "theorem"), "experiment",
               "step-size rule: experiment (alpha = T^-2/3, r = 1/m) or the tuned theorem pair"),
        _Param("rho", _positive_float, 400.0,
               "smoothness scale sizing the constraint box |c_i| <= C_Theta(rho)/m; "
               "the default keeps the box slack on the benchmark pair up to 5D"),
        _Param("delta", _unit_open_float, 0.1, "confidence level for reported bounds"),
        _seed_param(),
        _jobs_param(),
        _out_param(),
        _Param("radius_convention", _choice("box", "circumradius"), "box",
               "feature-map radius: the box half-width (the benchmark default) "
               "or the circumradius a*sqrt(n) (support assumption exact)"),
        _Param("theta0_scale", _fraction, 0.0,
               "theta_0 ~ U[-s, s]^m with s this fraction of the box bound; 0 = zero start"),
    ]


def _sweep_params() -> list[_Param]:
    return _run_params() + [
        _Param("param", _choice("m", "T"), None, "which knob the sweep varies", required=True),
        _Param("values", _int_list, None, "comma-separated sweep values (at least 2)",
               required=True),
    ]


def _mi_params() -> list[_Param]:
    return [
        _config_param(),
        _Param("half_width", _positive_float, 2.0, "box half-width of the correlated pair"),
        _Param("corr", _plain_float, 0.6, "correlation of the latent Gaussian, in (-1, 1)"),
        _Param("pairs", _positive_int, 10_000, "number of training pairs (cycled in epochs)"),
        _Param("m", _positive_int, 50, "network width"),
        _Param("T", _positive_int, 200_000, "training steps"),
        _Param("trials", _positive_int, 10, "independent repetitions"),
        _Param("eval_samples", _positive_int, 5000, "held-out pairs for the final estimate"),
        _Param("schedule", _choice("experiment", "theorem"), "experiment", "step-size rule"),
        _Param("rho", _positive_float, 400.0, "smoothness scale sizing the constraint box"),
        _Param("delta", _unit_open_float, 0.1, "confidence level for reported bounds"),
        _seed_param(),
        _jobs_param(),
        _out_param(),
        _Param("radius_convention", _choice("box", "circumradius"), "box",
               "feature-map radius: half-width or pair circumradius a*sqrt(2)"),
        _Param("theta0_scale", _fraction, 0.0, "random start scale, fraction of the box bound"),
    ]


def _constants_params() -> list[_Param]:
    return [
        _config_param(),
        _Param("n_values", _int_list, list(range(1, 11)), "dimensions to tabulate"),
        _Param("rho_values", _float_list, [0.1, 1.0, 10.0], "smoothness scales to tabulate"),
        _Param("half_width", _positive_float, 2.0, "box half-width the radius derives from"),
        _Param("radius_convention", _choice("box", "circumradius"), "box",
               "radius entering the constants: half-width or a*sqrt(n)"),
        _out_param(),
    ]


def _verify_approx_params() -> list[_Param]:
    return [
        _config_param(),
        _Param("function", _choice("gaussian", "mixture"), "gaussian",
               "catalog target: isotropic Gaussian or an off-center two-lobe mixture"),
        _Param("dim", _positive_int, 2, "ambient dimension (the mixture needs 2)"),
        _Param("radius", _positive_float, 1.0, "radius of the ball the error is certified on"),
        _Param("m_values", _int_list, [64, 128, 256, 512, 1024, 2048, 4096],
               "network widths to sample"),
        _Param("trials", _positive_int, 30, "feature draws per width"),
        _Param("delta", _unit_open_float, 0.1, "confidence level of the reported ceiling"),
        _seed_param(),
        _jobs_param(),
        _out_param(),
    ]


def _baseline_params() -> list[_Param]:
    return [
        _config_param(),
        _Param("dim", _positive_int, 2, "dimension of the test pair"),
        _Param("half_width", _positive_float, 2.0, "box half-width"),
        _Param("samples", _positive_int, 10_000, "sample count per side"),
        _Param("k", _positive_int, 1, "neighbor order"),
        _Param("trials", _positive_int, 10, "independent repetitions"),
        _seed_param(),
        _jobs_param(),
        _out_param(),
    ]


# --- config files and the resolved-settings comment line ----------------------

def _read_config(path: Path) -> dict[str, tuple[str, int]]:
    """Parse a flat settings file into {key: (raw value, line number)}."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    entries: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", line=lineno)
        key, value = (piece.strip() for piece in stripped.split("=", 1))
        if not _KEY_RE.match(key):
            raise ConfigError(f"invalid key {key!r}", line=lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        if not value:
            raise ConfigError(f"empty value for key {key!r}", line=lineno)
        entries[key] = (value, lineno)
    return entries


def _resolve(args: argparse.Namespace) -> dict:
    """Defaults, then config-file entries, then explicit flags."""
    schema: list[_Param] = args.schema
    by_name = {p.name: p for p in schema}
    values = {p.name: p.default for p in schema}
    config_path = getattr(args, "config", None)
    if config_path:
        for key, (raw, lineno) in _read_config(Path(config_path)).items():
            param = by_name.get(key)
            if param is None or not param.file_settable:
                raise ConfigError(f"unknown setting {key!r}", line=lineno)
            try:
                values[key] = param.parse(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{key}: {exc}", line=lineno) from exc
    for param in schema:
        flag_value = getattr(args, param.name, None)
        if flag_value is not None:
            values[param.name] = flag_value
    missing = [p.flag for p in schema if p.required and values[p.name] is None]
    if missing:
        raise ConfigError("missing required settings: " + ", ".join(missing))
    return values


def _comment_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)  # shortest exact round-trip
    if isinstance(value, (list, tuple)):
        return ",".join(_comment_value(v) for v in value)
    return str(value)


def _config_comment(command: str, schema: Sequence[_Param], values: dict) -> str:
    """First line of every artifact: tool version plus the resolved settings.

    ``jobs`` and paths are omitted: they do not influence the computed
    numbers, and identical runs must produce identical bytes.
    """
    skip = {"config", "out", "jobs"}
    parts = [f"{p.name}={_comment_value(values[p.name])}"
             for p in schema if p.name not in skip]
    return f"# rfdiv {__version__} {command} " + " ".join(parts)


# --- CSV / JSON plumbing -------------------------------------------------------

def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _table_text(comment: str, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(comment + "\r\n")
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(cell) for cell in row])
    return buf.getvalue()


def _records_table(comment: str, records: Sequence[RunRecord]) -> str:
    rows = [[getattr(r, col) for col in RUN_CSV_COLUMNS] for r in records]
    return _table_text(comment, RUN_CSV_COLUMNS, rows)


def _write_text(path: Path, text: str) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _report_path(out: Path) -> Path:
    report = out.with_suffix(".json")
    if report == out:
        raise ConfigError(
            f"output path {out} would collide with its JSON report; use a .csv path"
        )
    return report


def _error_stats(errors: Sequence[float]) -> dict:
    spread = statistics.stdev(errors) / math.sqrt(len(errors)) if len(errors) > 1 else 0.0
    return {
        "trials": len(errors),
        "median_abs_err": statistics.median(errors),
        "mean_abs_err": statistics.mean(errors),
        "std_err_of_mean": spread,
    }


def _json_report(command: str, values: dict, kl_true: float,
                 records: Sequence[RunRecord], bound) -> str:
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in values.items()}
    report = {
        "tool": "rfdiv",
        "version": __version__,
        "command": command,
        "config": config,
        "kl_true": kl_true,
        "summary": _error_stats([r.abs_err for r in records]),
        "records": [asdict(r) for r in records],
        "bound_report": None if bound is None else asdict(bound),
    }
    return json.dumps(report, indent=2) + "\n"


def _note(message: str) -> None:
    print(message, file=sys.stderr)


# --- trial execution -----------------------------------------------------------

def _map_trials(worker, params: list[dict], jobs: int) -> list:
    if jobs <= 1 or len(params) <= 1:
        return [worker(p) for p in params]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, params, chunksize=1))


def _feature_radius(half_width: float, n: int, convention: str) -> float:
    return half_width * math.sqrt(n) if convention == "circumradius" else half_width


def _resolve_schedule(kind: str, T: int, m: int, n: int, R: float,
                      rho: float, delta: float) -> tuple[float, float, float]:
    """(terminal alpha, r, decay power).  The experiment schedule decays
    per step, alpha_k = k^(-2/3); the tuned theorem pair is constant."""
    if kind == "experiment":
        alpha, r = schedule("experiment", T, m)
        return alpha, r, 2.0 / 3.0
    alpha, r = schedule("theorem", T, m, theorem_bound(n, m, T, R, rho, delta))
    return alpha, r, 0.0


def _maybe_theta0(scale: float, bound: float, m: int, rng: np.random.Generator):
    if scale == 0.0:
        return None
    return rng.uniform(-scale * bound, scale * bound, size=m)


def _kl_trial(p: dict) -> RunRecord:
    """One training run of the benchmark pair; fully determined by (seed, trial)."""
    start = time.perf_counter()
    root = np.random.SeedSequence((p["seed"], p["trial"]))
    ss_pair, ss_map, ss_eval, ss_init = root.spawn(4)
    pair = DistributionPair.gaussian_vs_uniform(p["n"], p["a"], ss_pair)
    R = _feature_radius(p["a"], p["n"], p["radius_convention"])
    fmap = sample_feature_map(p["n"], p["m"], R, np.random.default_rng(ss_map))
    C_Theta = c_theta(p["n"], R, p["rho"])
    theta0 = _maybe_theta0(p["theta0_scale"], C_Theta / p["m"], p["m"],
                           np.random.default_rng(ss_init))
    config = TrainConfig(alpha=p["alpha"], r=p["r"], T=p["T"], theta0=theta0,
                         alpha_decay=p["alpha_decay"])
    theta_bar, _ = run(config, fmap, pair, C_Theta, domain_radius=pair.R)
    eval_pair = DistributionPair.gaussian_vs_uniform(p["n"], p["a"], ss_eval)
    estimate = dv_estimate(fmap, theta_bar,
                           eval_pair.p.sample(p["eval_samples"]),
                           eval_pair.q.sample(p["eval_samples"]))
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return RunRecord(
        trial=p["trial"], n=p["n"], m=p["m"], T=p["T"], seed=p["seed"],
        kl_hat=float(estimate.kl_hat), kl_true=p["kl_true"],
        abs_err=abs(float(estimate.kl_hat) - p["kl_true"]),
        runtime_ms=runtime_ms, schedule_kind=p["schedule"],
    )


def _kl_trial_params(values: dict, trial: int, m: int, T: int,
                     alpha: float, r: float, decay: float, kl_true: float) -> dict:
    return {
        "seed": values["seed"], "trial": trial, "n": values["dim"],
        "a": values["half_width"], "m": m, "T": T, "alpha": alpha, "r": r,
        "alpha_decay": decay,
        "rho": values["rho"], "radius_convention": values["radius_convention"],
        "theta0_scale": values["theta0_scale"], "eval_samples": values["eval_samples"],
        "schedule": values["schedule"], "kl_true": kl_true,
    }


def _mi_trial(p: dict) -> RunRecord:
    start = time.perf_counter()
    root = np.random.SeedSequence((p["seed"], p["trial"]))
    ss_data, ss_map, ss_train, ss_eval, ss_init = root.spawn(5)
    dist = CorrelatedGaussianBox(p["a"], p["corr"], np.random.default_rng(ss_data))
    pairs = dist.sample(p["pairs"])
    R = _feature_radius(p["a"], 2, p["radius_convention"])
    fmap = sample_feature_map(2, p["m"], R, np.random.default_rng(ss_map))
    C_Theta = c_theta(2, R, p["rho"])
    theta0 = _maybe_theta0(p["theta0_scale"], C_Theta / p["m"], p["m"],
                           np.random.default_rng(ss_init))
    config = TrainConfig(alpha=p["alpha"], r=p["r"], T=p["T"], theta0=theta0,
                         alpha_decay=p["alpha_decay"])
    held_out = dist.reseeded(np.random.default_rng(ss_eval)).sample(p["eval_samples"])
    estimate, _ = mi_estimate(
        fmap, pairs[:, :1], pairs[:, 1:], config, C_Theta,
        rng=np.random.default_rng(ss_train),
        eval_pairs=(held_out[:, :1], held_out[:, 1:]),
        domain_radius=p["a"] * math.sqrt(2.0),
    )
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return RunRecord(
        trial=p["trial"], n=2, m=p["m"], T=p["T"], seed=p["seed"],
        kl_hat=float(estimate.kl_hat), kl_true=p["kl_true"],
        abs_err=abs(float(estimate.kl_hat) - p["kl_true"]),
        runtime_ms=runtime_ms, schedule_kind=p["schedule"],
    )


_REP_CACHE: dict[tuple, RepresentationDensity] = {}


def _catalog_representation(function: str, n: int, radius: float) -> RepresentationDensity:
    key = (function, n, radius)
    rep = _REP_CACHE.get(key)
    if rep is None:
        if function == "gaussian":
            spec = gaussian_spectrum(n)
        else:
            spec = gaussian_pair_spectrum(n, _MIX_C1, _MIX_C2)
        rep = build_representation(spec, radius)
        _REP_CACHE[key] = rep
    return rep


def _approx_trial_row(p: dict) -> tuple[int, int, float, float]:
    rep = _catalog_representation(p["function"], p["n"], p["radius"])
    rng = np.random.default_rng(np.random.SeedSequence((p["seed"], p["global_trial"])))
    result = approximation_trial(rep, p["m"], rng, delta=p["delta"])
    return (p["m"], p["trial"], result.linf_error, result.bound)


def _knn_trial(p: dict) -> RunRecord:
    start = time.perf_counter()
    pair = DistributionPair.gaussian_vs_uniform(
        p["n"], p["a"], np.random.SeedSequence((p["seed"], p["trial"]))
    )
    kl_hat = knn_kl(KnnConfig(
        samples_p=pair.p.sample(p["samples"]),
        samples_q=pair.q.sample(p["samples"]),
        k=p["k"],
    ))
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return RunRecord(
        trial=p["trial"], n=p["n"], m=0, T=0, seed=p["seed"],
        kl_hat=float(kl_hat), kl_true=p["kl_true"],
        abs_err=abs(float(kl_hat) - p["kl_true"]),
        runtime_ms=runtime_ms, schedule_kind="knn",
    )


# --- subcommands ----------------------------------------------------------------

def cmd_estimate(args: argparse.Namespace) -> int:
    values = _resolve(args)
    out = Path(values["out"]) if values["out"] else None
    report = _report_path(out) if out else None  # reject bad paths before training
    n, a = values["dim"], values["half_width"]
    kl_true = exact_kl(DistributionPair.gaussian_vs_uniform(n, a, 0))
    R = _feature_radius(a, n, values["radius_convention"])
    alpha, r, decay = _resolve_schedule(values["schedule"], values["T"], values["m"],
                                        n, R, values["rho"], values["delta"])
    params = [_kl_trial_params(values, k, values["m"], values["T"], alpha, r, decay, kl_true)
              for k in range(values["trials"])]
    records = _map_trials(_kl_trial, params, values["jobs"])
    text = _records_table(_config_comment("estimate", args.schema, values), records)
    sys.stdout.write(text)
    stats = _error_stats([rec.abs_err for rec in records])
    _note(f"estimate: median abs_err {stats['median_abs_err']:.6g} over "
          f"{stats['trials']} trials (kl_true {kl_true:.6g})")
    if out:
        _write_text(out, text)
        bound = _bound_or_none(n, values["m"], values["T"], R, values["rho"], values["delta"])
        _write_text(report, _json_report("estimate", values, kl_true, records, bound))
    return 0


def _bound_or_none(n: int, m: int, T: int, R: float, rho: float, delta: float):
    try:
        return theorem_bound(n, m, T, R, rho, delta)
    except InvalidArgument:
        return None  # T = 1: the tuned schedule behind the bound is undefined


def cmd_sweep(args: argparse.Namespace) -> int:
    values = _resolve(args)
    sweep_values = values["values"]
    if len(sweep_values) < 2:
        raise ConfigError("a sweep needs at least 2 values")
    if len(set(sweep_values)) != len(sweep_values):
        raise ConfigError("sweep values must be distinct")
    sweep_values = sorted(sweep_values)
    values["values"] = sweep_values
    n, a, knob = values["dim"], values["half_width"], values["param"]
    kl_true = exact_kl(DistributionPair.gaussian_vs_uniform(n, a, 0))
    R = _feature_radius(a, n, values["radius_convention"])

    params: list[dict] = []
    trial = 0
    for value in sweep_values:
        m = value if knob == "m" else values["m"]
        T = value if knob == "T" else values["T"]
        alpha, r, decay = _resolve_schedule(values["schedule"], T, m, n, R,
                                            values["rho"], values["delta"])
        for _ in range(values["trials"]):
            params.append(_kl_trial_params(values, trial, m, T, alpha, r, decay, kl_true))
            trial += 1
    records = _map_trials(_kl_trial, params, values["jobs"])

    per_value = values["trials"]
    summaries = []
    for i, value in enumerate(sweep_values):
        errors = [rec.abs_err for rec in records[i * per_value:(i + 1) * per_value]]
        stats = _error_stats(errors)
        summaries.append(SweepSummary(
            param=knob, value=value, median_err=stats["median_abs_err"],
            mean_err=stats["mean_abs_err"], std_err_of_mean=stats["std_err_of_mean"],
            trials=stats["trials"],
        ))

    comment = _config_comment("sweep", args.schema, values)
    summary_rows = [[getattr(s, col) for col in SWEEP_CSV_COLUMNS] for s in summaries]
    summary_text = _table_text(comment, SWEEP_CSV_COLUMNS, summary_rows)
    sys.stdout.write(summary_text)
    for s in summaries:
        _note(f"sweep {knob}={s.value}: median abs_err {s.median_err:.6g} "
              f"(+- 3 x {s.std_err_of_mean:.3g})")
    if values["out"]:
        out = Path(values["out"])
        _write_text(out, _records_table(comment, records))
        _write_text(out.with_name(out.stem + "_summary" + out.suffix), summary_text)
    return 0


def cmd_mi(args: argparse.Namespace) -> int:
    values = _resolve(args)
    out = Path(values["out"]) if values["out"] else None
    report = _report_path(out) if out else None  # reject bad paths before training
    a = values["half_width"]
    truth_dist = CorrelatedGaussianBox(a, values["corr"])
    mi_true = mutual_information_truth(truth_dist)
    R = _feature_radius(a, 2, values["radius_convention"])
    alpha, r, decay = _resolve_schedule(values["schedule"], values["T"], values["m"],
                                        2, R, values["rho"], values["delta"])
    params = [{
        "seed": values["seed"], "trial": k, "a": a, "corr": values["corr"],
        "pairs": values["pairs"], "m": values["m"], "T": values["T"],
        "alpha": alpha, "r": r, "alpha_decay": decay, "rho": values["rho"],
        "radius_convention": values["radius_convention"],
        "theta0_scale": values["theta0_scale"],
        "eval_samples": values["eval_samples"], "schedule": values["schedule"],
        "kl_true": mi_true,
    } for k in range(values["trials"])]
    records = _map_trials(_mi_trial, params, values["jobs"])
    text = _records_table(_config_comment("mi", args.schema, values), records)
    sys.stdout.write(text)
    stats = _error_stats([rec.abs_err for rec in records])
    _note(f"mi: median abs_err {stats['median_abs_err']:.6g} over "
          f"{stats['trials']} trials (truth {mi_true:.6g})")
    if out:
        _write_text(out, text)
        bound = _bound_or_none(2, values["m"], values["T"], R, values["rho"], values["delta"])
        _write_text(report, _json_report("mi", values, mi_true, records, bound))
    return 0


def cmd_constants(args: argparse.Namespace) -> int:
    values = _resolve(args)
    rows = []
    for n in values["n_values"]:
        R = _feature_radius(values["half_width"], n, values["radius_convention"])
        for entry in constants_grid([n], values["rho_values"], R):
            rows.append([entry["n"], entry["rho"], entry["kappa"],
                         entry["beta1"], entry["beta2"], entry["status"]])
    text = _table_text(_config_comment("constants", args.schema, values),
                       ("n", "rho", "kappa", "beta1", "beta2", "status"), rows)
    sys.stdout.write(text)
    if values["out"]:
        _write_text(Path(values["out"]), text)
    return 0


def cmd_verify_approx(args: argparse.Namespace) -> int:
    values = _resolve(args)
    m_values = sorted(set(values["m_values"]))
    # build in the parent: validates the configuration before any worker forks,
    # and forked workers inherit the cached representation
    _catalog_representation(values["function"], values["dim"], values["radius"])
    params = []
    global_trial = 0
    for m in m_values:
        for k in range(values["trials"]):
            params.append({
                "function": values["function"], "n": values["dim"],
                "radius": values["radius"], "m": m, "trial": k,
                "global_trial": global_trial, "seed": values["seed"],
                "delta": values["delta"],
            })
            global_trial += 1
    rows = _map_trials(_approx_trial_row, params, values["jobs"])
    text = _table_text(_config_comment("verify-approx", args.schema, values),
                       ("m", "trial", "linf_error", "prop1_bound"), rows)
    sys.stdout.write(text)
    medians = [statistics.median([row[2] for row in rows if row[0] == m]) for m in m_values]
    if len(m_values) >= 2:
        slope = float(np.polyfit(np.log(m_values), np.log(medians), 1)[0])
        _note(f"verify-approx: log-log slope of median error {slope:.3f} "
              f"over m in {m_values[0]}..{m_values[-1]}")
    if values["out"]:
        _write_text(Path(values["out"]), text)
    return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    values = _resolve(args)
    n, a = values["dim"], values["half_width"]
    kl_true = exact_kl(DistributionPair.gaussian_vs_uniform(n, a, 0))
    params = [{
        "seed": values["seed"], "trial": k, "n": n, "a": a,
        "samples": values["samples"], "k": values["k"], "kl_true": kl_true,
    } for k in range(values["trials"])]
    records = _map_trials(_knn_trial, params, values["jobs"])
    text = _records_table(_config_comment("baseline", args.schema, values), records)
    sys.stdout.write(text)
    stats = _error_stats([rec.abs_err for rec in records])
    _note(f"baseline: median abs_err {stats['median_abs_err']:.6g} over "
          f"{stats['trials']} trials (kl_true {kl_true:.6g})")
    if values["out"]:
        _write_text(Path(values["out"]), text)
    return 0


# --- entry point ------------------------------------------------------------------

def _add_params(parser: argparse.ArgumentParser, schema: list[_Param]) -> None:
    for param in schema:
        parser.add_argument(param.flag, dest=param.name, type=param.parse,
                            default=None, help=param.help, metavar=param.name.upper())
    parser.set_defaults(schema=schema)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfdiv",
        description="KL divergence and mutual information estimation with "
                    "random-feature ReLU networks, plus bound and "
                    "approximation-rate reports.",
    )
    parser.add_argument("--version", action="version", version=f"rfdiv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    specs = [
        ("estimate", "train on the Gaussian-vs-uniform pair and report KL estimates",
         _run_params(), cmd_estimate),
        ("sweep", "repeat the estimate over a list of m or T values",
         _sweep_params(), cmd_sweep),
        ("mi", "estimate mutual information of a correlated truncated Gaussian",
         _mi_params(), cmd_mi),
        ("constants", "tabulate kappa and the rate constants over (n, rho)",
         _constants_params(), cmd_constants),
        ("verify-approx", "measure certified sup-norm approximation errors",
         _verify_approx_params(), cmd_verify_approx),
        ("baseline", "k-NN divergence estimator on the same pair",
         _baseline_params(), cmd_baseline),
    ]
    for name, help_text, schema, func in specs:
        p = sub.add_parser(name, help=help_text)
        _add_params(p, schema)
        p.set_defaults(func=func)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _note(f"config error: {exc}")
        return 2
    except InvalidArgument as exc:
        _note(f"invalid configuration: {exc}")
        return 2
    except (NumericalFailure, QuadratureFailure, DomainViolation) as exc:
        _note(f"numerical failure: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
