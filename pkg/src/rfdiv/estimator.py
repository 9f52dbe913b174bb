"""Donsker-Varadhan evaluation of a trained network, plus the MI wrapper.

The KL estimate at coefficients theta is the empirical DV value

    kl_hat = mean_i psi(x_i, theta) - log( mean_j e^{psi(y_j, theta)} ),

with the second term computed by log-sum-exp so large rho (large C_Theta,
hence |psi| up to 2 R C_Theta) cannot overflow it.  Mutual information is
the same estimator run on paired samples: P-samples are the pairs (a_i, b_i)
themselves and Q-samples pair each a_i with an independently permuted b;
every training epoch and the final evaluation draw their own permutations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DimensionMismatch,
    EmptySampleSet,
    InsufficientSamples,
    NumericalFailure,
)
from .features import FeatureMap, psi
from .optimizer import TrainConfig, RunTrace, run


@dataclass(frozen=True)
class DvEstimate:
    """The empirical DV value and its two terms."""

    kl_hat: float
    mean_term: float
    log_mgf_term: float
    n_eval: int

    def __post_init__(self):
        if not np.isfinite(self.log_mgf_term):
            raise NumericalFailure(
                f"log-MGF term is {self.log_mgf_term}; evaluation samples or "
                f"coefficients are not finite"
            )


def _sample_matrix(name: str, samples: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != n:
        raise DimensionMismatch(f"{name} must have shape (N, {n}), got {x.shape}")
    if x.shape[0] == 0:
        raise EmptySampleSet(f"{name} is empty")
    return x


def dv_estimate(fmap: FeatureMap, theta: np.ndarray,
                x_samples: np.ndarray, y_samples: np.ndarray) -> DvEstimate:
    """Evaluate the DV objective on held-out samples (x from P, y from Q)."""
    x = _sample_matrix("x_samples", x_samples, fmap.n)
    y = _sample_matrix("y_samples", y_samples, fmap.n)
    psi_x = psi(fmap, x, theta)
    psi_y = psi(fmap, y, theta)
    mean_term = float(np.mean(psi_x))
    log_mgf_term = float(logsumexp(psi_y) - np.log(y.shape[0]))
    return DvEstimate(
        kl_hat=mean_term - log_mgf_term,
        mean_term=mean_term,
        log_mgf_term=log_mgf_term,
        n_eval=x.shape[0],
    )


def negative_objective(fmap: FeatureMap, theta: np.ndarray,
                       x_samples: np.ndarray, y_samples: np.ndarray) -> float:
    """Empirical f(theta) = -mean_term + log_mgf_term; what the optimizer descends."""
    return -dv_estimate(fmap, theta, x_samples, y_samples).kl_hat


class _PairedEpochStream:
    """Cycle paired samples; the Q side re-pairs with a fresh permutation per epoch."""

    def __init__(self, a: np.ndarray, b: np.ndarray, rng: np.random.Generator):
        self.a = a
        self.b = b
        self.rng = rng
        self.num = a.shape[0]
        self.pos = self.num  # force a new epoch on first use

    def __call__(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        xs, ys = [], []
        remaining = size
        while remaining > 0:
            if self.pos >= self.num:
                perm = self.rng.permutation(self.num)
                self.q_pairs = np.column_stack([self.a, self.b[perm]])
                self.pos = 0
            take = min(remaining, self.num - self.pos)
            sl = slice(self.pos, self.pos + take)
            xs.append(np.column_stack([self.a[sl], self.b[sl]]))
            ys.append(self.q_pairs[sl])
            self.pos += take
            remaining -= take
        return np.concatenate(xs), np.concatenate(ys)


def mi_estimate(fmap: FeatureMap, a_samples: np.ndarray, b_samples: np.ndarray,
                config: TrainConfig, C_Theta: float, *, rng=None,
                eval_pairs: tuple[np.ndarray, np.ndarray] | None = None,
                domain_radius: float | None = None,
                ) -> tuple[DvEstimate, RunTrace]:
    """Estimate I(a; b) from paired samples.

    Trains on the pairs against their permuted counterparts, then evaluates
    with one more independent permutation; ``eval_pairs = (a, b)`` supplies
    fresh held-out pairs for the evaluation instead of reusing the training
    ones.  Returns the estimate together with the training diagnostics.
    """
    a = np.asarray(a_samples, dtype=np.float64)
    b = np.asarray(b_samples, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise DimensionMismatch(
            f"paired samples must be (N, n_a) and (N, n_b), got {a.shape} and {b.shape}"
        )
    if a.shape[1] + b.shape[1] != fmap.n:
        raise DimensionMismatch(
            f"pair dimensions {a.shape[1]} + {b.shape[1]} do not sum to the "
            f"feature dimension {fmap.n}"
        )
    if a.shape[0] < 2:
        raise InsufficientSamples("mutual information needs at least 2 pairs to permute")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    stream = _PairedEpochStream(a, b, rng)
    theta_bar, trace = run(config, fmap, stream, C_Theta, domain_radius=domain_radius)

    if eval_pairs is not None:
        a_eval = np.asarray(eval_pairs[0], dtype=np.float64)
        b_eval = np.asarray(eval_pairs[1], dtype=np.float64)
    else:
        a_eval, b_eval = a, b
    x_eval = np.column_stack([a_eval, b_eval])
    y_eval = np.column_stack([a_eval, b_eval[rng.permutation(b_eval.shape[0])]])
    return dv_estimate(fmap, theta_bar, x_eval, y_eval), trace
