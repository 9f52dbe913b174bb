"""Closed-form constants against an independent extended-precision route.

The frozen decimal literals were produced once with mpmath at 50 significant
digits and pasted here; they pin both the library and the oracle module.
"""

import dataclasses
import math

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from rfdiv.constants import (
    EXP_OVERFLOW_LIMIT,
    BoundReport,
    OptimizerConstants,
    ProblemConstants,
    c_theta,
    checked_exp,
    constants_grid,
    half_integral_constant,
    kappa,
    schedule,
    spectral_mass_factor,
    sphere_area,
    theorem_bound,
)
from rfdiv.errors import ExponentOverflow, InvalidArgument, NumericalFailure, RfdivError

REL = 1e-12


def test_gamma_accuracy_on_working_range():
    # Everything here reduces to Gamma evaluations on roughly [0.5, 30].
    x = 0.5
    while x <= 30.0:
        assert math.gamma(x) == pytest.approx(float(mp.gamma(x)), rel=1e-12)
        x += 0.25


class TestSphereGeometry:
    def test_known_areas(self):
        assert sphere_area(1) == pytest.approx(2.0, rel=REL)
        assert sphere_area(2) == pytest.approx(2.0 * math.pi, rel=REL)
        assert sphere_area(3) == pytest.approx(4.0 * math.pi, rel=REL)

    def test_known_half_integrals(self):
        assert half_integral_constant(1) == pytest.approx(2.0, rel=REL)
        assert half_integral_constant(2) == pytest.approx(4.0, rel=REL)
        # integral of |z_1| over the 2-sphere is 2 pi, not pi
        assert half_integral_constant(3) == pytest.approx(6.2831853071795864769, rel=REL)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_matches_oracle(self, n):
        assert sphere_area(n) == pytest.approx(float(oracles.sphere_area(n)), rel=REL)
        assert half_integral_constant(n) == pytest.approx(
            float(oracles.half_integral_constant(n)), rel=REL
        )

    def test_mass_factor_frozen_values(self):
        frozen = {
            1: 0.6366197724,
            2: 0.3183098862,
            3: 0.1013211836,
            4: 0.02533029591,
            5: 0.005375255739,
            6: 0.001007860451,
        }
        for n, value in frozen.items():
            assert spectral_mass_factor(n) == pytest.approx(value, rel=1e-9)

    def test_mass_factor_decreasing_beyond_one(self):
        values = [spectral_mass_factor(n) for n in range(2, 31)]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("bad", [0, -1, 2.0, True])
    def test_dimension_validation(self, bad):
        with pytest.raises(InvalidArgument):
            sphere_area(bad)


class TestScaleConstants:
    def test_frozen_reference_point(self):
        assert kappa(2, 2.0, 1.0) == pytest.approx(71.109463973440897593, rel=REL)
        assert c_theta(2, 2.0, 1.0) == pytest.approx(4.5335733360735658197, rel=REL)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
    @pytest.mark.parametrize("R", [0.5, 1.0, 2.0, 7.5])
    @pytest.mark.parametrize("rho", [0.1, 1.0, 30.0])
    def test_matches_oracle(self, n, R, rho):
        assert kappa(n, R, rho) == pytest.approx(float(oracles.kappa(n, R, rho)), rel=REL)
        assert c_theta(n, R, rho) == pytest.approx(float(oracles.c_theta(n, R, rho)), rel=REL)

    @given(
        n=st.integers(min_value=1, max_value=10),
        R=st.floats(min_value=0.1, max_value=10.0),
        rho=st.floats(min_value=0.01, max_value=100.0),
    )
    def test_linear_in_rho_and_positive(self, n, R, rho):
        k1, k2 = kappa(n, R, rho), kappa(n, R, 2.0 * rho)
        c1, c2 = c_theta(n, R, rho), c_theta(n, R, 2.0 * rho)
        assert k1 > 0 and c1 > 0
        assert k2 == pytest.approx(2.0 * k1, rel=1e-12)
        assert c2 == pytest.approx(2.0 * c1, rel=1e-12)

    @pytest.mark.parametrize("bad_R", [0.0, -1.0, math.inf, math.nan])
    def test_radius_validation(self, bad_R):
        with pytest.raises(InvalidArgument):
            kappa(2, bad_R, 1.0)
        with pytest.raises(InvalidArgument):
            c_theta(2, bad_R, 1.0)

    def test_problem_constants_bundle(self):
        pc = ProblemConstants.compute(2, 2.0, 1.0)
        assert pc.A_prev == pytest.approx(2.0 * math.pi, rel=REL)
        assert pc.H_prev == pytest.approx(4.0, rel=REL)
        assert pc.C_Theta == pytest.approx(c_theta(2, 2.0, 1.0), rel=0)
        assert pc.kappa == pytest.approx(kappa(2, 2.0, 1.0), rel=0)
        with pytest.raises(dataclasses.FrozenInstanceError):
            pc.kappa = 0.0


class TestCheckedExp:
    def test_at_and_above_limit(self):
        assert checked_exp(EXP_OVERFLOW_LIMIT) == math.exp(700.0)
        with pytest.raises(ExponentOverflow):
            checked_exp(EXP_OVERFLOW_LIMIT + 1e-3)

    def test_overflow_is_a_numerical_failure(self):
        assert issubclass(ExponentOverflow, NumericalFailure)
        assert issubclass(ExponentOverflow, RfdivError)


class TestTheoremBound:
    def test_frozen_reference_point(self):
        rep = theorem_bound(n=2, m=50, T=500_000, R=2.0, rho=1.0, delta=0.1)
        assert rep.status == "ok"
        assert rep.b1 == pytest.approx(5.767595140744777731e32, rel=REL)
        assert rep.b2 == pytest.approx(10.276643596778600487, rel=REL)
        assert rep.b3 == pytest.approx(5.2042939105494148043e49, rel=REL)
        assert rep.b4 == pytest.approx(4.3313003438266403237e40, rel=REL)
        assert rep.beta1 == pytest.approx(1.9401935060113228795e38, rel=REL)
        assert rep.beta2 == pytest.approx(4.6252642601953677458e25, rel=REL)
        assert rep.alpha == pytest.approx(2.5198420997897463295e-4, rel=REL)
        assert rep.r == pytest.approx(4.9878847012725167311e-26, rel=REL)
        assert rep.approx_term == pytest.approx(58.96348435630645097, rel=REL)
        assert rep.total == pytest.approx(2.4444906390930662423e36, rel=REL)
        assert rep.total == pytest.approx(rep.approx_term + rep.opt_term, rel=0)

    @pytest.mark.parametrize("n,m,T,R,rho,delta", [
        (1, 10, 100, 1.0, 0.5, 0.05),
        (2, 200, 10_000, 2.0, 1.0, 0.1),
        (3, 1000, 1_000_000, 0.8, 2.0, 0.01),
        (5, 64, 500, 1.5, 0.2, 0.5),
    ])
    def test_matches_oracle(self, n, m, T, R, rho, delta):
        rep = theorem_bound(n, m, T, R, rho, delta)
        ref = oracles.theorem_bound(n, m, T, R, rho, delta)
        assert rep.status == "ok"
        for field, key in [("b1", "b1"), ("b2", "b2"), ("b3", "b3"), ("b4", "b4"),
                           ("beta1", "beta1"), ("beta2", "beta2"), ("alpha", "alpha"),
                           ("r", "r"), ("approx_term", "approx"), ("opt_term", "opt"),
                           ("total", "total")]:
            assert getattr(rep, field) == pytest.approx(float(ref[key]), rel=REL), field

    def test_monotone_in_width_and_steps(self):
        base = theorem_bound(2, 50, 10_000, 2.0, 1.0, 0.1)
        wider = theorem_bound(2, 200, 10_000, 2.0, 1.0, 0.1)
        longer = theorem_bound(2, 50, 1_000_000, 2.0, 1.0, 0.1)
        assert wider.approx_term < base.approx_term
        assert longer.opt_term < base.opt_term

    def test_vacuous_when_exponentials_overflow(self):
        # 12 R C_Theta exceeds 700 long before rho = 50 at R = 2, n = 2
        rep = theorem_bound(2, 50, 10_000, 2.0, 50.0, 0.1)
        assert rep.status == "vacuous"
        for field in ("b1", "b2", "b3", "b4", "beta1", "beta2", "alpha", "r",
                      "opt_term", "total"):
            assert getattr(rep, field) is None
        assert math.isfinite(rep.approx_term) and rep.approx_term > 0

    def test_validation(self):
        with pytest.raises(InvalidArgument):
            theorem_bound(2, 0, 100, 2.0, 1.0, 0.1)
        with pytest.raises(InvalidArgument):
            theorem_bound(2, 50, 1, 2.0, 1.0, 0.1)
        for delta in (0.0, 1.0, -0.5):
            with pytest.raises(InvalidArgument):
                theorem_bound(2, 50, 100, 2.0, 1.0, delta)


class TestSchedule:
    def test_experiment_schedule(self):
        alpha, r = schedule("experiment", T=1000, m=50)
        assert alpha == pytest.approx(1e-2, rel=REL)
        assert r == pytest.approx(0.02, rel=REL)
        alpha1, _ = schedule("experiment", T=1, m=3)
        assert alpha1 == 1.0

    def test_theorem_schedule_matches_report(self):
        rep = theorem_bound(2, 50, 500_000, 2.0, 1.0, 0.1)
        alpha, r = schedule("theorem", T=500_000, m=50, bound=rep)
        assert alpha == pytest.approx(rep.alpha, rel=0)
        assert r == pytest.approx(rep.r, rel=0)
        # T = 2 is the smallest horizon keeping alpha <= 1
        alpha2, _ = schedule("theorem", T=2, m=50, bound=rep)
        assert alpha2 == pytest.approx(1.0, rel=REL)

    def test_theorem_schedule_requirements(self):
        rep = theorem_bound(2, 50, 500_000, 2.0, 1.0, 0.1)
        with pytest.raises(InvalidArgument):
            schedule("theorem", T=500_000, m=50)
        with pytest.raises(InvalidArgument):
            schedule("theorem", T=1, m=50, bound=rep)
        vac = theorem_bound(2, 50, 10_000, 2.0, 50.0, 0.1)
        with pytest.raises(InvalidArgument):
            schedule("theorem", T=10_000, m=50, bound=vac)

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgument):
            schedule("adaptive", T=100, m=10)


class TestOptimizerConstants:
    def test_matches_oracle(self):
        C = c_theta(2, 2.0, 1.0)
        oc = OptimizerConstants.from_scale(2.0, C, m=100)
        ref = oracles.optimizer_constants(2.0, C, 100)
        for field in ("D_Theta", "D_Z", "L_z", "G", "L_F", "nu"):
            assert getattr(oc, field) == pytest.approx(float(ref[field]), rel=REL), field

    def test_compute_agrees_with_from_scale(self):
        assert OptimizerConstants.compute(2, 2.0, 1.0, 100) == \
            OptimizerConstants.from_scale(2.0, c_theta(2, 2.0, 1.0), 100)

    def test_tracker_interval(self):
        oc = OptimizerConstants.from_scale(1.0, 0.5, m=16)
        lo, hi = oc.z_interval()
        assert lo == pytest.approx(math.exp(-1.0), rel=REL)
        assert hi == pytest.approx(math.exp(1.0), rel=REL)
        assert lo * hi == pytest.approx(1.0, rel=REL)
        assert lo < 1.0 < hi

    def test_validation(self):
        with pytest.raises(InvalidArgument):
            OptimizerConstants.from_scale(2.0, 1.0, m=0)
        with pytest.raises(ExponentOverflow):
            OptimizerConstants.from_scale(100.0, 10.0, m=4)


class TestConstantsGrid:
    def test_rows_and_statuses(self):
        rows = constants_grid([1, 2], [1.0, 1e6], R=2.0)
        assert len(rows) == 4
        assert [(row["n"], row["rho"]) for row in rows] == \
            [(1, 1.0), (1, 1e6), (2, 1.0), (2, 1e6)]
        by_key = {(row["n"], row["rho"]): row for row in rows}
        ok = by_key[(2, 1.0)]
        assert ok["status"] == "ok"
        assert ok["kappa"] == pytest.approx(71.109463973440897593, rel=REL)
        assert ok["beta1"] > 0 and ok["beta2"] > 0
        vac = by_key[(2, 1e6)]
        assert vac["status"] == "vacuous"
        assert vac["beta1"] is None and vac["beta2"] is None
        assert math.isfinite(vac["kappa"])

    def test_empty_grid_rejected(self):
        with pytest.raises(InvalidArgument):
            constants_grid([], [1.0], R=2.0)
        with pytest.raises(InvalidArgument):
            constants_grid([2], [], R=2.0)


def test_bound_report_is_frozen():
    rep = theorem_bound(2, 50, 100, 2.0, 1.0, 0.1)
    assert isinstance(rep, BoundReport)
    with pytest.raises(dataclasses.FrozenInstanceError):
        rep.total = 0.0
