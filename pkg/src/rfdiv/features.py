"""Random ReLU feature maps.

A feature map is a frozen draw of m directions w_i (uniform on the unit
sphere in R^n) and biases b_i (uniform on [-R, R]).  It defines

    phi(x)_i = max(0, w_i . x + b_i),          x in R^n,
    psi(x, theta) = phi(x) . theta,

and the network trained by the optimizer is x -> psi(x, theta).  The map is
sampled once per run and never adapted, so the training objective stays
convex in theta.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidArgument

# Direction draws with norm below this are resampled; a zero vector carries
# no direction and dividing by its norm would poison the map.
_MIN_DIRECTION_NORM = 1e-12


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Frozen random-feature parameters: directions W (m, n) and biases b (m,)."""

    W: np.ndarray
    b: np.ndarray
    R: float
    n: int = field(init=False)
    m: int = field(init=False)

    def __post_init__(self):
        W = np.ascontiguousarray(self.W, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        if W.ndim != 2:
            raise InvalidArgument(f"W must be a (m, n) matrix, got shape {W.shape}")
        if b.ndim != 1 or b.shape[0] != W.shape[0]:
            raise DimensionMismatch(
                f"b must have one bias per row of W; got {b.shape} vs {W.shape}"
            )
        if not (self.R > 0 and np.isfinite(self.R)):
            raise InvalidArgument(f"R must be finite and > 0, got {self.R!r}")
        row_norms = np.linalg.norm(W, axis=1)
        if not np.allclose(row_norms, 1.0, rtol=0.0, atol=1e-9):
            raise InvalidArgument("rows of W must have unit Euclidean norm")
        if np.any(np.abs(b) > self.R * (1.0 + 1e-12)):
            raise InvalidArgument("biases must lie in [-R, R]")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n", W.shape[1])
        object.__setattr__(self, "m", W.shape[0])


def sample_feature_map(n: int, m: int, R: float, rng) -> FeatureMap:
    """Draw a width-m feature map: sphere-uniform directions, U[-R, R] biases.

    ``rng`` is a numpy Generator or anything ``np.random.default_rng``
    accepts as a seed.  Directions come from normalized Gaussian draws;
    draws with vanishing norm are resampled rather than normalized.
    """
    if n < 1:
        raise InvalidArgument(f"dimension must be >= 1, got {n}")
    if m < 1:
        raise InvalidArgument(f"width must be >= 1, got {m}")
    if not (R > 0 and np.isfinite(R)):
        raise InvalidArgument(f"R must be finite and > 0, got {R!r}")
    if not isinstance(rng, np.random.Generator) and not hasattr(rng, "standard_normal"):
        rng = np.random.default_rng(rng)
    W = rng.standard_normal((m, n))
    norms = np.linalg.norm(W, axis=1)
    while np.any(bad := norms < _MIN_DIRECTION_NORM):
        k = int(bad.sum())
        W[bad] = rng.standard_normal((k, n))
        norms[bad] = np.linalg.norm(W[bad], axis=1)
    W /= norms[:, None]
    b = rng.uniform(-R, R, size=m)
    return FeatureMap(W=W, b=b, R=float(R))


def phi(fmap: FeatureMap, x: np.ndarray) -> np.ndarray:
    """ReLU features of one point (n,) -> (m,) or a batch (N, n) -> (N, m)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != fmap.n:
        raise DimensionMismatch(
            f"expected points in R^{fmap.n}, got array of shape {x.shape}"
        )
    pre = x @ fmap.W.T + fmap.b
    return np.maximum(pre, 0.0, out=pre)


def psi(fmap: FeatureMap, x: np.ndarray, theta: np.ndarray) -> np.ndarray | float:
    """Network output phi(x) . theta; scalar for a single point, (N,) for a batch."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (fmap.m,):
        raise DimensionMismatch(
            f"theta must have shape ({fmap.m},), got {theta.shape}"
        )
    out = phi(fmap, x) @ theta
    return float(out) if out.ndim == 0 else out
