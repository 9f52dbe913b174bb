"""Fixed quadrature rules backing the exact-integration oracles.

Everything here is deterministic: Gauss-Legendre nodes on an interval, their
tensor products over a box, and a discrete probability measure built by
weighting a tensor rule with a density.  The optimizer's exact gradient and
Hessian and the KL ground-truth oracles all integrate against these.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import InvalidArgument, QuadratureFailure


def gauss_legendre(num: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [lo, hi]."""
    if num < 1:
        raise InvalidArgument(f"node count must be >= 1, got {num}")
    if not (hi > lo):
        raise InvalidArgument(f"need lo < hi, got [{lo}, {hi}]")
    x, w = np.polynomial.legendre.leggauss(num)
    half = 0.5 * (hi - lo)
    return 0.5 * (hi + lo) + half * x, half * w


def tensor_rule(n: int, num: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product rule over the box [lo, hi]^n: points (num^n, n), weights (num^n,)."""
    if n < 1:
        raise InvalidArgument(f"dimension must be >= 1, got {n}")
    x, w = gauss_legendre(num, lo, hi)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    weights = reduce(np.multiply.outer, [w] * n).ravel() if n > 1 else w.copy()
    return points, weights


@dataclass(frozen=True, eq=False)
class QuadratureMeasure:
    """A discrete probability measure: points (N, n) with weights summing to 1.

    Densities enter only through the weights, so expectations against the
    measure are plain weighted sums and every downstream "exact" quantity is
    finite-dimensional calculus.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if points.ndim != 2 or weights.ndim != 1 or points.shape[0] != weights.shape[0]:
            raise InvalidArgument(
                f"need points (N, n) with weights (N,), got {points.shape} and {weights.shape}"
            )
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise InvalidArgument("weights must be finite and nonnegative")
        total = weights.sum()
        if not np.isclose(total, 1.0, rtol=1e-9, atol=0):
            raise InvalidArgument(f"weights must sum to 1, got {total!r}")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_log_density(cls, log_density, n: int, a: float, nodes: int = 48) -> "QuadratureMeasure":
        """Discretize an unnormalized log-density on [-a, a]^n with a tensor rule."""
        points, w = tensor_rule(n, nodes, -a, a)
        log_dens = np.asarray(log_density(points), dtype=np.float64)
        if log_dens.shape != (points.shape[0],):
            raise InvalidArgument("log_density must map (N, n) points to (N,) values")
        peak = log_dens.max()
        if not np.isfinite(peak):
            raise QuadratureFailure("density mass is zero or non-finite on the box")
        weights = w * np.exp(log_dens - peak)
        total = weights.sum()
        if not np.isfinite(total) or total <= 0:
            raise QuadratureFailure("density mass is zero or non-finite on the box")
        return cls(points=points, weights=weights / total)

    def expect(self, values: np.ndarray) -> np.ndarray | float:
        """Expectation of per-point values: (N,) -> scalar, (N, k) -> (k,)."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape[0] != self.weights.shape[0]:
            raise InvalidArgument(
                f"values must have one row per point, got {values.shape}"
            )
        out = self.weights @ values
        return float(out) if np.ndim(out) == 0 else out
