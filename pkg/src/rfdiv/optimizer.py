"""Projected stochastic gradient for the Donsker-Varadhan objective.

One step of the recursion, given a fresh pair (x_k, y_k) ~ P x Q:

    theta_{k+1} = Pi_Theta( theta_k + alpha_k r (phi(x_k)
                    - (1/z_k) e^{phi(y_k) . theta_k} phi(y_k)) )
    z_{k+1}     = z_k + alpha_k (e^{phi(y_k) . theta_k} - z_k)

where Pi_Theta clamps every coefficient to [-C_Theta/m, C_Theta/m] and z
tracks the normalizer z*(theta) = E_Q[e^{phi(y) . theta}] that an unbiased
gradient would need.  The step size is either constant (the setting the
averaged-iterate error bound is stated for) or polynomially decaying,
alpha_k = alpha (T/k)^p with k counted from 1, which anchors ``alpha`` at
the final step.  Both updates read the pre-update theta_k, and the
returned estimate is the average of theta_0 .. theta_{T-1}.

``run`` drives the compiled chunk kernel; ``step`` is the plain-numpy
reference used to cross-check it.  The exact_* functions integrate the
objective, gradient, normalizer, and Hessian against fixed quadrature
measures so tests can compare sampled quantities with calculus.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from ._quad import QuadratureMeasure
from .constants import checked_exp
from .errors import (
    DimensionMismatch,
    DomainViolation,
    ExponentOverflow,
    InvalidArgument,
)
from .features import FeatureMap, phi

# feature-matrix chunking keeps peak memory near 2 x 16 MB regardless of m
_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class TrainConfig:
    """Step sizes and horizon for one training run.

    ``alpha`` is the step size at the final step; with ``alpha_decay = p``
    the run uses alpha_k = alpha (T/k)^p, k = 1..T, so p = 0 is the
    constant schedule and p = 2/3 the Robbins-Monro style decay the
    benchmark runs use.  The initial step alpha T^p may not exceed 1, which
    keeps the tracker update a convex combination and so keeps z inside
    the invariant interval.

    ``theta0 = None`` means the zero vector, which always lies in the
    constraint box and makes the network identically zero, consistent with
    the default tracker start z0 = 1 (the exact normalizer of the zero
    network).  ``seed`` is bookkeeping: samplers are built from it by the
    caller, the optimizer itself draws nothing.
    """

    alpha: float
    r: float
    T: int
    theta0: np.ndarray | None = None
    z0: float = 1.0
    seed: int | None = None
    alpha_decay: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidArgument(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise InvalidArgument(f"r must be finite and > 0, got {self.r}")
        if self.T < 1:
            raise InvalidArgument(f"T must be >= 1, got {self.T}")
        if not (0.0 <= self.alpha_decay <= 1.0):
            raise InvalidArgument(
                f"alpha_decay must lie in [0, 1], got {self.alpha_decay}"
            )
        if self.alpha * float(self.T) ** self.alpha_decay > 1.0 + 1e-9:
            raise InvalidArgument(
                f"initial step alpha T^alpha_decay = "
                f"{self.alpha * float(self.T) ** self.alpha_decay:.3g} exceeds 1"
            )
        if not (self.z0 > 0 and math.isfinite(self.z0)):
            raise InvalidArgument(f"z0 must be finite and > 0, got {self.z0}")
        if self.theta0 is not None:
            theta0 = np.ascontiguousarray(self.theta0, dtype=np.float64)
            if theta0.ndim != 1:
                raise InvalidArgument("theta0 must be a vector")
            object.__setattr__(self, "theta0", theta0)

    def step_size(self, k: int) -> float:
        """alpha_k for the 1-based step index k."""
        if not 1 <= k <= self.T:
            raise InvalidArgument(f"step index must lie in 1..{self.T}, got {k}")
        return self.alpha * (self.T / k) ** self.alpha_decay


@dataclass(frozen=True, eq=False)
class ParamState:
    """Snapshot of the recursion: coefficients, tracker, counter, iterate sum."""

    theta: np.ndarray
    z: float
    k: int
    theta_sum: np.ndarray

    @classmethod
    def initial(cls, m: int, theta0: np.ndarray | None = None, z0: float = 1.0) -> "ParamState":
        theta = np.zeros(m) if theta0 is None else np.array(theta0, dtype=np.float64)
        if theta.shape != (m,):
            raise DimensionMismatch(f"theta0 must have shape ({m},), got {theta.shape}")
        return cls(theta=theta, z=float(z0), k=0, theta_sum=np.zeros(m))

    def mean_iterate(self) -> np.ndarray:
        if self.k == 0:
            return self.theta.copy()
        return self.theta_sum / self.k


def project_box(theta: np.ndarray, bound: float) -> np.ndarray:
    """Euclidean projection onto the box {|theta_i| <= bound}: a componentwise clamp."""
    if not (bound > 0):
        raise InvalidArgument(f"projection bound must be > 0, got {bound}")
    return np.clip(theta, -bound, bound)


def gradient_estimate(fmap: FeatureMap, theta: np.ndarray, z: float,
                      x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """The stochastic ascent direction phi(x) - (1/z) e^{phi(y) . theta} phi(y)."""
    phi_y = phi(fmap, y)
    return phi(fmap, x) - (math.exp(float(phi_y @ theta)) / z) * phi_y


def step(state: ParamState, fmap: FeatureMap, sample: tuple[np.ndarray, np.ndarray],
         alpha: float, r: float, box_bound: float) -> ParamState:
    """Reference single step; ``run`` reproduces this semantics in compiled form."""
    x, y = sample
    direction = gradient_estimate(fmap, state.theta, state.z, x, y)
    e = math.exp(float(phi(fmap, y) @ state.theta))
    return ParamState(
        theta=project_box(state.theta + alpha * r * direction, box_bound),
        z=state.z + alpha * (e - state.z),
        k=state.k + 1,
        theta_sum=state.theta_sum + state.theta,
    )


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Diagnostics from a run: sparse per-step records plus whole-run counters.

    The arrays are sampled every ``trace_stride`` steps and record pre-update
    state; ``running_estimate`` is mean_j<=k psi(x_j, theta_j) - log z_k, a
    cheap online view of the DV value.
    """

    steps: np.ndarray
    z: np.ndarray
    theta_inf_norm: np.ndarray
    running_estimate: np.ndarray
    z_violations: int
    rejected_pairs: int
    exp_overflows: int
    final_z: float


def _draw_pairs(sampler, size: int) -> tuple[np.ndarray, np.ndarray]:
    if callable(sampler):
        x, y = sampler(size)
    else:
        x, y = sampler.p.sample(size), sampler.q.sample(size)
    return np.ascontiguousarray(x, dtype=np.float64), np.ascontiguousarray(y, dtype=np.float64)


def _fill_chunk(sampler, rows: int, n: int, radius: float | None,
                on_violation: str) -> tuple[np.ndarray, np.ndarray, int]:
    """Draw `rows` pairs, enforcing the support radius; returns rejection count."""
    x_chunk = np.empty((rows, n))
    y_chunk = np.empty((rows, n))
    filled = 0
    rejected = 0
    empty_draws = 0
    while filled < rows:
        x, y = _draw_pairs(sampler, rows - filled)
        if x.shape != (rows - filled, n) or y.shape != x.shape:
            raise DimensionMismatch(
                f"sampler returned shapes {x.shape}, {y.shape}; expected ({rows - filled}, {n})"
            )
        if radius is not None:
            nx = np.linalg.norm(x, axis=1)
            ny = np.linalg.norm(y, axis=1)
            bad = (nx > radius) | (ny > radius)
            if on_violation == "clip":
                x[nx > radius] *= (radius / nx[nx > radius])[:, None]
                y[ny > radius] *= (radius / ny[ny > radius])[:, None]
            elif np.any(bad):
                rejected += int(bad.sum())
                x, y = x[~bad], y[~bad]
        taken = x.shape[0]
        x_chunk[filled:filled + taken] = x
        y_chunk[filled:filled + taken] = y
        filled += taken
        empty_draws = empty_draws + 1 if taken == 0 else 0
        if empty_draws >= 100:
            raise DomainViolation(
                f"sampler produced no points inside the radius-{radius:g} ball "
                f"in {empty_draws} consecutive draws"
            )
    return x_chunk, y_chunk, rejected


def _z_interval(R: float, C_Theta: float) -> tuple[float, float]:
    try:
        hi = checked_exp(2.0 * R * C_Theta)
    except ExponentOverflow:
        return 0.0, math.inf  # interval too wide to represent; invariant is vacuous
    return 1.0 / hi, hi


def run(config: TrainConfig, fmap: FeatureMap, sampler, C_Theta: float, *,
        domain_radius: float | None = None, on_violation: str = "reject",
        trace_stride: int | None = None, use_kernel: bool = True,
        ) -> tuple[np.ndarray, RunTrace]:
    """Train for config.T steps and return (mean iterate, diagnostics).

    ``sampler`` is either an object with ``.p.sample`` / ``.q.sample`` (a
    DistributionPair) or a callable size -> (x_batch, y_batch).  Pairs whose
    x or y lands outside the ball of radius ``domain_radius`` (default: the
    feature map's R) are rejected and redrawn by default, with a warning
    reporting the count; pass on_violation="clip" to project them onto the
    ball instead, or domain_radius=<circumradius> when the bias convention
    keeps fmap.R smaller than the support.

    ``use_kernel=False`` replays the run through the reference ``step``;
    it is slow and exists so tests can cross-check the compiled path.
    """
    if C_Theta is not None and not (C_Theta > 0):
        raise InvalidArgument(f"C_Theta must be > 0, got {C_Theta}")
    if on_violation not in ("reject", "clip"):
        raise InvalidArgument(f"on_violation must be 'reject' or 'clip', got {on_violation!r}")
    m, T = fmap.m, config.T
    bound = C_Theta / m
    if config.theta0 is not None:
        if config.theta0.shape != (m,):
            raise DimensionMismatch(
                f"theta0 must have shape ({m},), got {config.theta0.shape}"
            )
        if np.max(np.abs(config.theta0)) > bound * (1.0 + 1e-12):
            raise InvalidArgument("theta0 must lie in the constraint box")
    z_lo, z_hi = _z_interval(fmap.R, C_Theta)
    if not (z_lo <= config.z0 <= z_hi):
        raise InvalidArgument(
            f"z0 = {config.z0} outside the tracker interval [{z_lo:.3g}, {z_hi:.3g}]"
        )
    radius = fmap.R if domain_radius is None else float(domain_radius)

    if trace_stride is None:
        trace_stride = max(1, T // 1000)
    if trace_stride < 0:
        raise InvalidArgument(f"trace_stride must be >= 0, got {trace_stride}")
    n_trace = 0 if trace_stride == 0 else 1 + (T - 1) // trace_stride
    trace_out = np.empty((n_trace, 4))

    theta = np.zeros(m) if config.theta0 is None else config.theta0.copy()
    theta_sum = np.zeros(m)
    z = float(config.z0)
    psi_x_sum = 0.0
    cursor = 0
    z_violations = 0
    exp_overflows = 0
    rejected = 0

    state = ParamState(theta=theta, z=z, k=0, theta_sum=theta_sum)  # python path only
    # the kernel evaluates alpha_k as alpha0 (k+1)^-decay; the reference path
    # must use the identical expression for the two to agree bit for bit
    alpha0 = config.alpha * float(T) ** config.alpha_decay
    decay = config.alpha_decay
    chunk_rows = max(1, min(T, _CHUNK_ENTRIES // m))
    done = 0
    while done < T:
        rows = min(chunk_rows, T - done)
        x_chunk, y_chunk, newly_rejected = _fill_chunk(
            sampler, rows, fmap.n, radius, on_violation
        )
        rejected += newly_rejected
        if use_kernel:
            Fx = phi(fmap, x_chunk)
            Fy = phi(fmap, y_chunk)
            z, psi_x_sum, cursor, zv, eo = _kernels.train_chunk(
                theta, theta_sum, Fx, Fy, alpha0, decay, config.r, bound,
                z, z_lo, z_hi, done, psi_x_sum, trace_stride, trace_out, cursor,
            )
            z_violations += zv
            exp_overflows += eo
        else:
            for row in range(rows):
                k = done + row
                psi_x_sum += float(phi(fmap, x_chunk[row]) @ state.theta)
                if trace_stride > 0 and k % trace_stride == 0:
                    trace_out[cursor] = (k, state.z, np.max(np.abs(state.theta)),
                                         psi_x_sum / (k + 1) - math.log(state.z))
                    cursor += 1
                state = step(state, fmap, (x_chunk[row], y_chunk[row]),
                             alpha0 * (k + 1.0) ** (-decay), config.r, bound)
                if not (z_lo <= state.z <= z_hi):
                    z_violations += 1
            z = state.z
            theta_sum = state.theta_sum
        done += rows

    if rejected > 0:
        warnings.warn(
            f"{rejected} sample pairs fell outside the radius-{radius:g} ball "
            f"and were rejected; the support assumption may not hold",
            RuntimeWarning,
            stacklevel=2,
        )
    trace = RunTrace(
        steps=trace_out[:cursor, 0].astype(np.int64),
        z=trace_out[:cursor, 1].copy(),
        theta_inf_norm=trace_out[:cursor, 2].copy(),
        running_estimate=trace_out[:cursor, 3].copy(),
        z_violations=z_violations,
        rejected_pairs=rejected,
        exp_overflows=exp_overflows,
        final_z=float(z),
    )
    return theta_sum / T, trace


# --- quadrature oracles: testing-scale calculus for the same objective ---

def exact_normalizer(fmap: FeatureMap, theta: np.ndarray, q_measure: QuadratureMeasure) -> float:
    """z*(theta) = E_Q[e^{phi(y) . theta}]."""
    s = phi(fmap, q_measure.points) @ theta
    return float(np.exp(logsumexp(s, b=q_measure.weights)))


def exact_objective(fmap: FeatureMap, theta: np.ndarray,
                    p_measure: QuadratureMeasure, q_measure: QuadratureMeasure) -> float:
    """f(theta) = -E_P[psi] + log E_Q[e^psi]; minus the population DV value."""
    mean_term = p_measure.expect(phi(fmap, p_measure.points) @ theta)
    s = phi(fmap, q_measure.points) @ theta
    return float(-mean_term + logsumexp(s, b=q_measure.weights))


def exact_gradient(fmap: FeatureMap, theta: np.ndarray,
                   p_measure: QuadratureMeasure, q_measure: QuadratureMeasure) -> np.ndarray:
    """grad f = -E_P[phi] + E_{Q_theta}[phi], with dQ_theta/dQ = e^psi / E_Q[e^psi]."""
    Fq = phi(fmap, q_measure.points)
    s = Fq @ theta
    tilt = q_measure.weights * np.exp(s - logsumexp(s, b=q_measure.weights))
    return -p_measure.expect(phi(fmap, p_measure.points)) + tilt @ Fq


def exact_hessian(fmap: FeatureMap, theta: np.ndarray, q_measure: QuadratureMeasure) -> np.ndarray:
    """hess f = Cov_{Q_theta}(phi); positive semidefinite, so f is convex."""
    Fq = phi(fmap, q_measure.points)
    s = Fq @ theta
    tilt = q_measure.weights * np.exp(s - logsumexp(s, b=q_measure.weights))
    mean = tilt @ Fq
    return Fq.T @ (tilt[:, None] * Fq) - np.outer(mean, mean)
