"""Classical k-nearest-neighbor KL estimator, the comparison method.

The estimate from samples x_1..x_N ~ P and y_1..y_M ~ Q in R^n is

    (n/N) sum_i log(nu_k(i) / rho_k(i)) + log(M / (N-1)),

where rho_k(i) is the distance from x_i to its k-th nearest neighbor among
the other P-samples and nu_k(i) its k-th nearest neighbor among Q-samples.
It is consistent but not sign-constrained, so negative values are normal
near zero divergence.  Neighbor queries go through a KD-tree; with equal
distances the tree's tie order is unspecified, which cannot change the
estimate because only distances enter it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, InsufficientSamples, InvalidArgument

# Zero distances (duplicate points) are floored here before the log.
_DISTANCE_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class KnnConfig:
    """Inputs of the baseline estimator: neighbor index and the two sample sets."""

    samples_p: np.ndarray
    samples_q: np.ndarray
    k: int = 1

    def __post_init__(self):
        p = np.ascontiguousarray(self.samples_p, dtype=np.float64)
        q = np.ascontiguousarray(self.samples_q, dtype=np.float64)
        if p.ndim != 2 or q.ndim != 2:
            raise InvalidArgument("sample sets must be (N, n) arrays")
        if p.shape[1] != q.shape[1]:
            raise DimensionMismatch(
                f"sample sets disagree on dimension: {p.shape[1]} vs {q.shape[1]}"
            )
        if self.k < 1:
            raise InvalidArgument(f"neighbor index k must be >= 1, got {self.k}")
        if p.shape[0] <= self.k or q.shape[0] <= self.k:
            raise InsufficientSamples(
                f"need more than k={self.k} points in each set, "
                f"got {p.shape[0]} and {q.shape[0]}"
            )
        object.__setattr__(self, "samples_p", p)
        object.__setattr__(self, "samples_q", q)


def knn_kl(config: KnnConfig) -> float:
    """Evaluate the k-NN divergence estimate; deterministic in its inputs."""
    p, q, k = config.samples_p, config.samples_q, config.k
    num_p, n = p.shape
    num_q = q.shape[0]
    # within-P distances: query k+1 neighbors so the self-match drops out
    rho = cKDTree(p).query(p, k=k + 1, workers=-1)[0][:, k]
    nu = cKDTree(q).query(p, k=k, workers=-1)[0]
    if k > 1:
        nu = nu[:, k - 1]
    floored = int(np.sum(rho < _DISTANCE_FLOOR) + np.sum(nu < _DISTANCE_FLOOR))
    if floored:
        warnings.warn(
            f"{floored} zero nearest-neighbor distances floored at {_DISTANCE_FLOOR:g}; "
            f"duplicate points make the estimate unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
        rho = np.maximum(rho, _DISTANCE_FLOOR)
        nu = np.maximum(nu, _DISTANCE_FLOOR)
    return float(
        n / num_p * np.sum(np.log(nu / rho)) + math.log(num_q / (num_p - 1))
    )
