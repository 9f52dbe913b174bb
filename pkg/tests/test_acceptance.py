"""End-to-end acceptance checks.

Thirteen checks covering gradient/Hessian oracles, optimizer invariants,
the 2D and 5D benchmark accuracy and their scaling trends, the constant
evaluators against an extended-precision route, the width-m approximation
rate, the surface-measure and ridge-representation identities, the k-NN
baseline, and byte-level reproducibility of the CLI artifacts.

Each check prints exactly one PASS/FAIL line with the measured numbers;
run ``pytest tests/test_acceptance.py -v -s`` to stream them.  The whole
module takes a few minutes, dominated by the T = 10^6 training runs.
"""

import contextlib
import csv
import io
import math
import os
from time import perf_counter

import numpy as np
import oracles

from rfdiv import cli
from rfdiv._quad import QuadratureMeasure
from rfdiv.approx_verify import (
    ball_grid,
    constant_rep_residual,
    linear_rep_residual,
    sphere_surface_mc,
)
from rfdiv.baseline import KnnConfig, knn_kl
from rfdiv.constants import (
    c_theta,
    constants_grid,
    half_integral_constant,
    kappa,
    spectral_mass_factor,
    theorem_bound,
)
from rfdiv.distributions import DistributionPair, TruncatedGaussianBox, UniformBox
from rfdiv.estimator import dv_estimate
from rfdiv.features import sample_feature_map
from rfdiv.optimizer import TrainConfig, exact_gradient, exact_hessian, exact_objective, run

_JOBS = str(min(4, os.cpu_count() or 1))


def _verdict(num: int, name: str, ok: bool, detail: str) -> None:
    line = f"acceptance {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _cli(argv: list[str]) -> int:
    """Run the CLI in-process with its terminal output swallowed."""
    with contextlib.redirect_stdout(io.StringIO()), \
            contextlib.redirect_stderr(io.StringIO()):
        return cli.main(argv)


def _read_table(path) -> tuple[list[str], list[list[str]]]:
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# rfdiv ")
    rows = list(csv.reader(lines[1:]))
    return rows[0], rows[1:]


def _column(path, name: str) -> list[float]:
    header, rows = _read_table(path)
    idx = header.index(name)
    return [float(row[idx]) for row in rows]


def _quadrature_setup(rho: float = 0.5, m: int = 8, nodes: int = 40):
    """Small 2D problem whose expectations are tensor quadratures."""
    pair = DistributionPair.gaussian_vs_uniform(2, 1.0, 7)
    fmap = sample_feature_map(2, m, pair.R, np.random.default_rng(8))
    p_meas = QuadratureMeasure.from_log_density(pair.p.log_density, 2, 1.0, nodes)
    q_meas = QuadratureMeasure.from_log_density(pair.q.log_density, 2, 1.0, nodes)
    return fmap, p_meas, q_meas, c_theta(2, pair.R, rho)


def test_01_gradient_matches_finite_differences():
    start = perf_counter()
    fmap, p_meas, q_meas, C = _quadrature_setup()
    bound = C / fmap.m
    rng = np.random.default_rng(101)
    h = 1e-6
    worst = 0.0
    for _ in range(20):
        theta = rng.uniform(-bound, bound, fmap.m)
        grad = exact_gradient(fmap, theta, p_meas, q_meas)
        fd = np.empty(fmap.m)
        for i in range(fmap.m):
            bump = np.zeros(fmap.m)
            bump[i] = h
            fd[i] = (exact_objective(fmap, theta + bump, p_meas, q_meas)
                     - exact_objective(fmap, theta - bump, p_meas, q_meas)) / (2 * h)
        rel = float(np.linalg.norm(grad - fd) / np.linalg.norm(grad))
        worst = max(worst, rel)
    elapsed = perf_counter() - start
    _verdict(1, "gradient-vs-central-differences",
             worst <= 1e-5 and elapsed < 10.0,
             f"worst rel err {worst:.3e} <= 1e-05 at 20 points, {elapsed:.1f}s < 10s")


def test_02_objective_is_convex_on_the_box():
    fmap, _, q_meas, C = _quadrature_setup()
    bound = C / fmap.m
    rng = np.random.default_rng(202)
    min_eig = math.inf
    for _ in range(20):
        theta = rng.uniform(-bound, bound, fmap.m)
        eigs = np.linalg.eigvalsh(exact_hessian(fmap, theta, q_meas))
        min_eig = min(min_eig, float(eigs[0]))
    _verdict(2, "hessian-positive-semidefinite", min_eig >= -1e-8,
             f"min eigenvalue {min_eig:.3e} >= -1e-08 at 20 points")


def test_03_iterates_and_tracker_stay_in_their_sets():
    pair = DistributionPair.gaussian_vs_uniform(2, 2.0, 31)
    # circumradius convention: the support assumption holds exactly, so the
    # tracker interval [e^{-2RC}, e^{2RC}] is a theorem, not a heuristic
    fmap = sample_feature_map(2, 50, pair.R, np.random.default_rng(32))
    C = c_theta(2, pair.R, 1.0)
    bound = C / fmap.m
    T = 100_000
    config = TrainConfig(
        alpha=T ** (-2.0 / 3.0), r=1.0 / fmap.m, T=T, alpha_decay=2.0 / 3.0,
        theta0=np.random.default_rng(33).uniform(-bound, bound, fmap.m),
    )
    _, trace = run(config, fmap, pair, C, trace_stride=1)
    z_lo, z_hi = math.exp(-2.0 * fmap.R * C), math.exp(2.0 * fmap.R * C)
    theta_max = float(np.max(trace.theta_inf_norm))
    z_min, z_max = float(np.min(trace.z)), float(np.max(trace.z))
    ok = (trace.steps.shape[0] == T
          and trace.z_violations == 0
          and theta_max <= bound * (1.0 + 1e-12)
          and z_lo <= z_min and z_max <= z_hi
          and z_lo <= trace.final_z <= z_hi)
    _verdict(3, "box-and-tracker-invariants", ok,
             f"stride-1 trace over {T} steps: max |theta|_inf {theta_max:.4g} <= "
             f"{bound:.4g}, z in [{z_min:.3g}, {z_max:.3g}] within "
             f"[{z_lo:.3g}, {z_hi:.3g}], {trace.z_violations} violations")


def _null_trial(trial: int) -> float:
    seeds = np.random.SeedSequence((404, trial)).spawn(5)
    p = TruncatedGaussianBox(2, 2.0, seeds[0])
    q = TruncatedGaussianBox(2, 2.0, seeds[1])
    fmap = sample_feature_map(2, 50, 2.0, np.random.default_rng(seeds[2]))
    C = c_theta(2, 2.0, 400.0)
    T = 100_000
    config = TrainConfig(alpha=T ** (-2.0 / 3.0), r=1.0 / 50, T=T, alpha_decay=2.0 / 3.0)
    theta_bar, _ = run(config, fmap, lambda size: (p.sample(size), q.sample(size)),
                       C, domain_radius=2.0 * math.sqrt(2.0))
    x_eval = TruncatedGaussianBox(2, 2.0, seeds[3]).sample(5000)
    y_eval = TruncatedGaussianBox(2, 2.0, seeds[4]).sample(5000)
    return dv_estimate(fmap, theta_bar, x_eval, y_eval).kl_hat


def test_04_null_case_estimates_near_zero():
    estimates = [abs(_null_trial(k)) for k in range(10)]
    median = float(np.median(estimates))
    _verdict(4, "identical-distributions-null", median <= 0.05,
             f"median |kl_hat| {median:.4g} <= 0.05 over 10 trials")


def test_05_2d_benchmark_accuracy(tmp_path):
    out = tmp_path / "bench2d.csv"
    start = perf_counter()
    code = _cli(["estimate", "--seed", "0", "--jobs", "1", "--out", str(out)])
    elapsed = perf_counter() - start
    assert code == 0
    oracle = float(oracles.trunc_gauss_kl(2, 2))
    kl_hats = _column(out, "kl_hat")
    kl_true = _column(out, "kl_true")[0]
    median = float(np.median([abs(v - oracle) for v in kl_hats]))
    ok = (median <= 0.1
          and abs(kl_true - oracle) <= 1e-9 * oracle
          and elapsed <= 300.0)
    _verdict(5, "2d-benchmark", ok,
             f"median |kl_hat - {oracle:.6f}| = {median:.4g} <= 0.1 over 10 trials, "
             f"{elapsed:.0f}s <= 300s on one core")


def test_06_error_shrinks_with_more_steps(tmp_path):
    out = tmp_path / "varyT.csv"
    code = _cli(["sweep", "--param", "T", "--values", "10000,100000,1000000",
                 "--m", "50", "--seed", "0", "--jobs", _JOBS, "--out", str(out)])
    assert code == 0
    medians = _column(tmp_path / "varyT_summary.csv", "median_err")
    inversions = sum(1 for lo, hi in zip(medians, medians[1:]) if hi > lo)
    ok = medians[2] <= medians[0] and inversions <= 1
    _verdict(6, "error-vs-T-trend", ok,
             f"median err {medians[0]:.4g} -> {medians[1]:.4g} -> {medians[2]:.4g} "
             f"over T=1e4,1e5,1e6; {inversions} inversions <= 1")


def test_07_error_shrinks_with_more_features(tmp_path):
    out = tmp_path / "varym.csv"
    code = _cli(["sweep", "--param", "m", "--values", "10,200",
                 "--seed", "0", "--jobs", _JOBS, "--out", str(out)])
    assert code == 0
    medians = _column(tmp_path / "varym_summary.csv", "median_err")
    _verdict(7, "error-vs-m-trend", medians[1] <= medians[0],
             f"median err {medians[1]:.4g} at m=200 <= {medians[0]:.4g} at m=10, T=5e5")


def test_08_5d_benchmark_accuracy(tmp_path):
    out = tmp_path / "bench5d.csv"
    start = perf_counter()
    code = _cli(["estimate", "--dim", "5", "--m", "100", "--T", "1000000",
                 "--seed", "0", "--jobs", _JOBS, "--out", str(out)])
    elapsed = perf_counter() - start
    assert code == 0
    oracle_5d = float(oracles.trunc_gauss_kl(2, 5))
    oracle_2d = float(oracles.trunc_gauss_kl(2, 2))
    kl_hats = _column(out, "kl_hat")
    kl_true = _column(out, "kl_true")[0]
    median = float(np.median([abs(v - oracle_5d) for v in kl_hats]))
    ok = (median <= 0.2
          and abs(oracle_5d - 2.5 * oracle_2d) <= 1e-12 * oracle_5d
          and abs(kl_true - oracle_5d) <= 1e-9 * oracle_5d)
    _verdict(8, "5d-benchmark", ok,
             f"median |kl_hat - {oracle_5d:.6f}| = {median:.4g} <= 0.2 over 10 trials "
             f"(n=5, m=100, T=1e6); runtime {elapsed:.0f}s total, "
             f"{elapsed / 10:.1f}s per trial")


def test_09_constants_match_extended_precision():
    rng = np.random.default_rng(909)
    fields = ("b1", "b2", "b3", "b4", "beta1", "beta2", "alpha", "r")
    worst = 0.0
    checked = 0
    while checked < 50:
        n = int(rng.integers(1, 9))
        R = float(10.0 ** rng.uniform(-0.5, 0.7))
        rho = float(10.0 ** rng.uniform(-2.0, 0.5))
        if 12.0 * R * c_theta(n, R, rho) >= 600.0:
            continue  # keep every exponential representable on both routes
        m = int(rng.integers(2, 501))
        T = int(rng.integers(2, 10 ** 6))
        delta = float(rng.uniform(0.01, 0.3))
        ref = oracles.theorem_bound(n, m, T, R, rho, delta)
        rep = theorem_bound(n, m, T, R, rho, delta)
        assert rep.status == "ok"
        pairs = [(kappa(n, R, rho), oracles.kappa(n, R, rho)),
                 (c_theta(n, R, rho), oracles.c_theta(n, R, rho)),
                 (rep.approx_term, ref["approx"]),
                 (rep.opt_term, ref["opt"]),
                 (rep.total, ref["total"])]
        pairs += [(getattr(rep, f), ref[f]) for f in fields]
        for ours, exact in pairs:
            worst = max(worst, abs(ours - float(exact)) / abs(float(exact)))
        checked += 1

    # tabulated facts: kappa linear in rho, the spectral mass factor strictly
    # decreasing in n, beta1/beta2 strictly increasing in rho, overflow rows
    # flagged rather than dropped
    rhos = [0.05, 0.1, 0.5, 1.0, 2.0]
    grid = constants_grid([2, 3], rhos, 2.0)
    facts = True
    for n in (2, 3):
        rows = [row for row in grid if row["n"] == n]
        facts &= all(row["status"] == "ok" for row in rows)
        unit = kappa(n, 2.0, 1.0)
        facts &= all(abs(row["kappa"] - row["rho"] * unit) <= 1e-12 * row["kappa"]
                     for row in rows)
        for lo, hi in zip(rows, rows[1:]):
            facts &= hi["beta1"] > lo["beta1"] and hi["beta2"] > lo["beta2"]
    mass = [spectral_mass_factor(n) for n in range(1, 21)]
    facts &= all(hi < lo for lo, hi in zip(mass[1:], mass[2:]))
    facts &= all(abs(mass[n - 1] - float(oracles.mass_factor(n))) <= 1e-9 * mass[n - 1]
                 for n in range(1, 21))
    guarded = constants_grid([2], [0.1, 1.0, 10.0, 100.0], 2.0)
    facts &= [row["status"] for row in guarded] == ["ok", "ok", "vacuous", "vacuous"]
    facts &= all(hi["kappa"] > lo["kappa"] for lo, hi in zip(guarded, guarded[1:]))

    _verdict(9, "constant-evaluators", worst <= 1e-9 and facts,
             f"worst rel err {worst:.3e} <= 1e-09 over 50 tuples; "
             f"tabulated monotonicity facts {'hold' if facts else 'FAIL'}")


def test_10_approximation_error_rate(tmp_path):
    out = tmp_path / "rate.csv"
    start = perf_counter()
    code = _cli(["verify-approx", "--seed", "0", "--jobs", _JOBS, "--out", str(out)])
    elapsed = perf_counter() - start
    assert code == 0
    header, rows = _read_table(out)
    m_idx, err_idx, bound_idx = (header.index(c) for c in ("m", "linf_error", "prop1_bound"))
    m_values = sorted({int(row[m_idx]) for row in rows})
    medians = [float(np.median([float(r[err_idx]) for r in rows if int(r[m_idx]) == m]))
               for m in m_values]
    slope = float(np.polyfit(np.log(m_values), np.log(medians), 1)[0])
    at_1024 = [float(r[err_idx]) <= float(r[bound_idx]) for r in rows if int(r[m_idx]) == 1024]
    coverage = float(np.mean(at_1024))
    ok = -0.7 <= slope <= -0.3 and coverage >= 0.9 and elapsed <= 600.0
    _verdict(10, "width-scaling-of-sup-error", ok,
             f"log-log slope {slope:.3f} in [-0.7, -0.3] over m=64..4096, "
             f"certified error under the width bound in {coverage:.0%} of 30 trials "
             f"at m=1024, {elapsed:.0f}s <= 600s")


def test_11_surface_and_representation_identities():
    ok = True
    details = []
    for n in (2, 3, 5):
        est, se = sphere_surface_mc(lambda w: np.abs(w[:, 0]), n, 10 ** 5,
                                    np.random.default_rng(n))
        gap = abs(est - half_integral_constant(n))
        ok &= gap <= 3.0 * se
        details.append(f"|z1| gap {gap / se:.2f}se (n={n})")
        est0, se0 = sphere_surface_mc(lambda w: w[:, 1] * np.sign(w[:, 0]), n, 10 ** 5,
                                      np.random.default_rng(100 + n))
        ok &= abs(est0) <= 3.0 * se0
    xs = ball_grid(2, 1.0, 7)[0][:20]
    const_rel = constant_rep_residual(2.7, 1.0, xs) / 2.7
    v = np.array([1.04, -0.78])
    lin_rel = linear_rep_residual(v, 1.0, xs) / float(np.linalg.norm(v))
    ok &= const_rel <= 1e-3 and lin_rel <= 1e-3
    _verdict(11, "measure-and-ridge-identities", ok,
             "; ".join(details) + f"; constant rep rel {const_rel:.2e}, "
             f"linear rep rel {lin_rel:.2e} <= 1e-03 at 20 points each")


def test_12_knn_baseline_recovers_the_benchmark():
    oracle = float(oracles.trunc_gauss_kl(2, 2))
    errors = []
    for trial in range(10):
        seeds = np.random.SeedSequence((1212, trial)).spawn(2)
        p = TruncatedGaussianBox(2, 2.0, seeds[0]).sample(10_000)
        q = UniformBox(2, 2.0, seeds[1]).sample(10_000)
        errors.append(abs(knn_kl(KnnConfig(p, q, k=1)) - oracle))
    median = float(np.median(errors))
    _verdict(12, "knn-baseline", median <= 0.1,
             f"median |knn - {oracle:.6f}| = {median:.4g} <= 0.1 over 10 trials "
             f"of 1e4 samples")


def test_13_parallel_runs_are_byte_identical(tmp_path):
    est = ["estimate", "--T", "20000", "--m", "16", "--trials", "6",
           "--eval-samples", "1000", "--seed", "42"]
    swp = ["sweep", "--param", "m", "--values", "8,16", "--T", "10000",
           "--trials", "4", "--eval-samples", "500", "--seed", "42"]
    paths = {}
    for tag, argv in (("est", est), ("swp", swp)):
        for jobs in ("1", "4"):
            out = tmp_path / f"{tag}_{jobs}.csv"
            assert _cli(argv + ["--jobs", jobs, "--out", str(out)]) == 0
            paths[(tag, jobs)] = out
    same_est = paths[("est", "1")].read_bytes() == paths[("est", "4")].read_bytes()
    same_long = paths[("swp", "1")].read_bytes() == paths[("swp", "4")].read_bytes()
    same_summary = ((tmp_path / "swp_1_summary.csv").read_bytes()
                    == (tmp_path / "swp_4_summary.csv").read_bytes())
    _verdict(13, "sequential-vs-4-workers", same_est and same_long and same_summary,
             f"estimate CSV identical: {same_est}; sweep long/summary identical: "
             f"{same_long}/{same_summary} at master seed 42")
