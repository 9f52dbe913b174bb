"""Closed-form constants and error bounds for the random-feature KL estimator.

Everything in this module is a pure function of the problem parameters
(dimension ``n``, domain radius ``R``, smoothness bound ``rho``, network
width ``m``, step count ``T``, confidence ``delta``).  The key quantities:

* ``sphere_area(n)``       -- surface area of the unit sphere in R^n.
* ``half_integral_constant(n)`` -- integral of |z_1| over that sphere;
  enters the optimal density used to reproduce linear terms with ReLUs.
* ``c_theta(n, R, rho)``   -- coefficient-scale constant; the training
  box constrains every network coefficient to [-C_Theta/m, C_Theta/m].
* ``kappa(n, R, rho)``     -- worst-case approximation-error factor; the
  achievable sup-norm error of a width-m network is
  kappa * (sqrt(n) + sqrt(log(1/delta))) / sqrt(m).
* ``theorem_bound(...)``   -- the full high-probability estimation-error
  bound for the averaged iterate, split into an approximation term
  (m dependence) and an optimization term (T dependence).

The b1..b4 and beta1/beta2 constants grow like exp(c * R * C_Theta), so
they overflow double precision quickly as rho or R grow.  All such
exponentials go through one audited helper, ``checked_exp``; evaluators
that can overflow report an explicit "vacuous" status instead of
returning inf or nan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ExponentOverflow, InvalidArgument

# Exponents above this are treated as overflow.  exp(700) ~ 1e304 is just
# inside the double range; anything larger carries no information anyway.
EXP_OVERFLOW_LIMIT = 700.0


def checked_exp(exponent: float) -> float:
    """The audited exponential: every e^{c R C_Theta} goes through here."""
    if exponent > EXP_OVERFLOW_LIMIT:
        raise ExponentOverflow(
            f"exponent {exponent:.6g} exceeds the overflow limit "
            f"{EXP_OVERFLOW_LIMIT:g}; the resulting bound is vacuous"
        )
    return math.exp(exponent)


def _check_dimension(n: int) -> int:
    if not isinstance(n, (int,)) or isinstance(n, bool):
        raise InvalidArgument(f"dimension must be an integer, got {n!r}")
    if n < 1:
        raise InvalidArgument(f"dimension must be >= 1, got {n}")
    return n


def sphere_area(n: int) -> float:
    """Surface area A_{n-1} = 2 pi^{n/2} / Gamma(n/2) of the unit sphere in R^n.

    For n = 1 the "sphere" is the two-point set {-1, +1} with counting
    measure, so the area is 2.
    """
    _check_dimension(n)
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def half_integral_constant(n: int) -> float:
    """H_{n-1} = 2 pi^{(n-1)/2} / Gamma((n+1)/2) = integral of |z_1| over the sphere.

    Checks: n=1 gives 2, n=2 gives 4, n=3 gives 2 pi.
    """
    _check_dimension(n)
    return 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n + 1) / 2.0)


def spectral_mass_factor(n: int) -> float:
    """The recurring factor 2 A_{n-1} / (2 pi)^n.

    Bounds the integrals of |ghat(w)| * ||2 pi w||^i for i in {0, 1, 2}
    in units of the F-norm.  Strictly decreasing in n for n >= 2, which
    partially offsets the exponential growth of the bounds in rho.
    """
    return 2.0 * sphere_area(n) / (2.0 * math.pi) ** n


def _check_positive(name: str, value: float) -> float:
    if not (value > 0) or not math.isfinite(value):
        raise InvalidArgument(f"{name} must be finite and > 0, got {value!r}")
    return float(value)


def kappa(n: int, R: float, rho: float) -> float:
    """Approximation-error factor (16R^2 + 32R + 21 sqrt(n) R + 36) * 2A_{n-1}/(2pi)^n * rho."""
    _check_dimension(n)
    R = _check_positive("R", R)
    rho = _check_positive("rho", rho)
    poly = 16.0 * R * R + 32.0 * R + 21.0 * math.sqrt(n) * R + 36.0
    return poly * spectral_mass_factor(n) * rho


def c_theta(n: int, R: float, rho: float) -> float:
    """Coefficient-scale constant (2R + 4 + 3 sqrt(n) + 4/R) * 2A_{n-1}/(2pi)^n * rho.

    The training constraint box is {theta : |theta_i| <= c_theta(...) / m}.
    """
    _check_dimension(n)
    R = _check_positive("R", R)
    rho = _check_positive("rho", rho)
    poly = 2.0 * R + 4.0 + 3.0 * math.sqrt(n) + 4.0 / R
    return poly * spectral_mass_factor(n) * rho


@dataclass(frozen=True)
class ProblemConstants:
    """Geometry- and smoothness-derived constants for one problem instance."""

    n: int
    R: float
    rho: float
    A_prev: float     # A_{n-1}, unit-sphere surface area
    H_prev: float     # H_{n-1}, integral of |z_1| over the sphere
    C_Theta: float
    kappa: float

    @classmethod
    def compute(cls, n: int, R: float, rho: float) -> "ProblemConstants":
        return cls(
            n=n,
            R=float(R),
            rho=float(rho),
            A_prev=sphere_area(n),
            H_prev=half_integral_constant(n),
            C_Theta=c_theta(n, R, rho),
            kappa=kappa(n, R, rho),
        )


@dataclass(frozen=True)
class OptimizerConstants:
    """Constants controlling the stochastic-gradient recursion.

    With s = 2 R C_Theta (the sup-norm bound on the network output over the
    radius-R ball):

    * ``D_Theta`` -- diameter of the coefficient box, 2 C_Theta / sqrt(m).
    * ``D_Z``     -- e^s, bounds the diameter of the tracker interval
      Z = [e^-s, e^s] that the normalization tracker z lives in.
    * ``L_z``     -- Lipschitz constant 2 R sqrt(m) e^s of the exact
      normalizer z*(theta) = E_Q[e^{phi(y)' theta}].
    * ``G``       -- norm bound 2 R sqrt(m) (1 + e^{2s}) on the stochastic
      gradient direction.
    * ``L_F``     -- Lipschitz constant 2 R sqrt(m) e^{3s} of that
      direction with respect to z.
    * ``nu``      -- e^s, standard-deviation bound of the tracker's
      one-sample target e^{phi(y)' theta}.
    """

    D_Theta: float
    D_Z: float
    L_z: float
    G: float
    L_F: float
    nu: float

    @classmethod
    def compute(cls, n: int, R: float, rho: float, m: int) -> "OptimizerConstants":
        return cls.from_scale(R, c_theta(n, R, rho), m)

    @classmethod
    def from_scale(cls, R: float, C_Theta: float, m: int) -> "OptimizerConstants":
        R = _check_positive("R", R)
        C_Theta = _check_positive("C_Theta", C_Theta)
        if m < 1:
            raise InvalidArgument(f"m must be >= 1, got {m}")
        s = 2.0 * R * C_Theta
        root_m = math.sqrt(m)
        return cls(
            D_Theta=2.0 * C_Theta / root_m,
            D_Z=checked_exp(s),
            L_z=2.0 * R * root_m * checked_exp(s),
            G=2.0 * R * root_m * (1.0 + checked_exp(2.0 * s)),
            L_F=2.0 * R * root_m * checked_exp(3.0 * s),
            nu=checked_exp(s),
        )

    def z_interval(self) -> tuple[float, float]:
        """The invariant interval [e^{-2 R C_Theta}, e^{2 R C_Theta}] for the tracker."""
        return 1.0 / self.D_Z, self.D_Z


@dataclass(frozen=True)
class BoundReport:
    """The full estimation-error bound for the averaged iterate.

    ``total = approx_term + opt_term`` where the approximation term is
    2 kappa (sqrt(n) + sqrt(log(1/delta))) / sqrt(m) and the optimization
    term is beta1 T^{-1/3} + beta2 T^{-1/2}.  ``alpha`` and ``r`` are the
    step sizes that make the optimization term attain that rate.

    When the intermediate exponentials overflow double precision the
    ``status`` field is ``"vacuous"`` and every unrepresentable field is
    None; a bound beyond 1e308 constrains nothing.
    """

    n: int
    m: int
    T: int
    R: float
    rho: float
    delta: float
    b1: float | None
    b2: float | None
    b3: float | None
    b4: float | None
    beta1: float | None
    beta2: float | None
    alpha: float | None
    r: float | None
    approx_term: float
    opt_term: float | None
    total: float | None
    status: str  # "ok" or "vacuous"


def _rate_constants(n: int, R: float, rho: float) -> tuple[float, float, float, float, float, float]:
    """b1..b4 and beta1, beta2 as functions of (n, R, rho).  May raise ExponentOverflow."""
    C = c_theta(n, R, rho)
    s = R * C
    b1 = 2.0 * R * C * checked_exp(8.0 * s)
    b2 = C * C / 2.0
    b3 = 8.0 * R**3 * C * (checked_exp(8.0 * s) + checked_exp(12.0 * s)) \
        + 2.0 * R * R * (1.0 + checked_exp(4.0 * s)) ** 2
    b4 = 2.0 * R * C * checked_exp(10.0 * s)
    beta1 = (2.0 ** (-2.0 / 3.0) + 2.0 ** (1.0 / 3.0)) * b1 ** (1.0 / 3.0) * b4 ** (2.0 / 3.0)
    beta2 = 2.0 * math.sqrt(b2 * b3)
    if not all(map(math.isfinite, (b1, b3, b4, beta1, beta2))):
        raise ExponentOverflow("rate constants overflowed double precision")
    return b1, b2, b3, b4, beta1, beta2


def theorem_bound(n: int, m: int, T: int, R: float, rho: float, delta: float) -> BoundReport:
    """Evaluate the high-probability error bound at the rate-optimal step sizes."""
    _check_dimension(n)
    if m < 1:
        raise InvalidArgument(f"m must be >= 1, got {m}")
    if T < 2:
        raise InvalidArgument(f"T must be >= 2 for the tuned schedule, got {T}")
    if not (0.0 < delta < 1.0):
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")
    approx = 2.0 * kappa(n, R, rho) * (math.sqrt(n) + math.sqrt(math.log(1.0 / delta))) / math.sqrt(m)
    try:
        b1, b2, b3, b4, beta1, beta2 = _rate_constants(n, R, rho)
    except ExponentOverflow:
        return BoundReport(
            n=n, m=m, T=T, R=float(R), rho=float(rho), delta=float(delta),
            b1=None, b2=None, b3=None, b4=None, beta1=None, beta2=None,
            alpha=None, r=None, approx_term=approx, opt_term=None, total=None,
            status="vacuous",
        )
    alpha = 2.0 ** (2.0 / 3.0) * T ** (-2.0 / 3.0)
    r = T ** (1.0 / 6.0) * 2.0 ** (-2.0 / 3.0) * math.sqrt(b2 / b3) / m
    opt = beta1 * T ** (-1.0 / 3.0) + beta2 * T ** (-0.5)
    return BoundReport(
        n=n, m=m, T=T, R=float(R), rho=float(rho), delta=float(delta),
        b1=b1, b2=b2, b3=b3, b4=b4, beta1=beta1, beta2=beta2,
        alpha=alpha, r=r, approx_term=approx, opt_term=opt, total=approx + opt,
        status="ok",
    )


def schedule(kind: str, T: int, m: int, bound: BoundReport | None = None) -> tuple[float, float]:
    """Step sizes (alpha, r) for a run of T steps with m neurons.

    ``kind="theorem"`` returns the rate-optimal pair
    alpha = 2^{2/3} T^{-2/3}, r = T^{1/6} 2^{-2/3} sqrt(b2/b3) / m, which
    needs the rate constants from a non-vacuous ``BoundReport``.

    ``kind="experiment"`` returns the simpler pair alpha = T^{-2/3},
    r = 1/m that the benchmark experiments use.

    T = 1 is allowed (alpha = 1, a single full-weight tracker update);
    the theorem schedule needs T >= 2 to keep alpha <= 1.
    """
    if m < 1:
        raise InvalidArgument(f"m must be >= 1, got {m}")
    if kind == "experiment":
        if T < 1:
            raise InvalidArgument(f"T must be >= 1, got {T}")
        return float(T) ** (-2.0 / 3.0), 1.0 / m
    if kind == "theorem":
        if T < 2:
            raise InvalidArgument(f"T must be >= 2 for the theorem schedule, got {T}")
        if bound is None:
            raise InvalidArgument("theorem schedule needs a BoundReport for its rate constants")
        if bound.status != "ok" or bound.b2 is None or bound.b3 is None:
            raise InvalidArgument("theorem schedule is undefined for a vacuous bound")
        alpha = 2.0 ** (2.0 / 3.0) * float(T) ** (-2.0 / 3.0)
        r = float(T) ** (1.0 / 6.0) * 2.0 ** (-2.0 / 3.0) * math.sqrt(bound.b2 / bound.b3) / m
        return alpha, r
    raise InvalidArgument(f"unknown schedule kind {kind!r}; expected 'theorem' or 'experiment'")


def constants_grid(
    n_values: Sequence[int] | Iterable[int],
    rho_values: Sequence[float] | Iterable[float],
    R: float,
) -> list[dict]:
    """Rows of (n, rho, kappa, beta1, beta2, status) over a parameter grid.

    beta1/beta2 are None on rows where the exponentials overflow; the
    status column says "vacuous" there so downstream tables keep the row.
    """
    n_list = list(n_values)
    rho_list = list(rho_values)
    if not n_list or not rho_list:
        raise InvalidArgument("n_values and rho_values must be nonempty")
    rows = []
    for n in n_list:
        for rho in rho_list:
            row = {"n": n, "rho": float(rho), "kappa": kappa(n, R, rho)}
            try:
                *_, beta1, beta2 = _rate_constants(n, R, rho)
                row.update(beta1=beta1, beta2=beta2, status="ok")
            except ExponentOverflow:
                row.update(beta1=None, beta2=None, status="vacuous")
            rows.append(row)
    return rows
