"""Pieces shared by both VAEs: Gaussian posterior math and training plumbing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class TrainingDiverged(RuntimeError):
    """Training hit a non-finite loss; the model keeps its last finite-epoch weights."""


@dataclass
class GaussianParams:
    """Diagonal Gaussian posterior (mu, sigma); sigma strictly positive.

    Arrays are either (D,) for a single posterior or (N, D) for a batch.
    """

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        if self.mu.shape != self.sigma.shape:
            raise ValueError(f"mu/sigma shape mismatch: {self.mu.shape} vs {self.sigma.shape}")
        if not (np.all(np.isfinite(self.mu)) and np.all(np.isfinite(self.sigma))):
            raise ValueError("non-finite posterior parameters")
        if np.any(self.sigma <= 0):
            raise ValueError("sigma must be strictly positive")


def reparameterize(g: GaussianParams, eps: np.ndarray) -> np.ndarray:
    """Differentiable sampling: mu + sigma * eps with eps ~ N(0, I)."""
    eps = np.asarray(eps, dtype=np.float64)
    if eps.shape != g.mu.shape:
        raise ValueError(f"eps shape {eps.shape} != posterior shape {g.mu.shape}")
    return g.mu + g.sigma * eps


def gaussian_kl(mu: np.ndarray, sigma: np.ndarray) -> float:
    """KL(N(mu, diag sigma^2) || N(0, I)) = 0.5 * sum(mu^2 + sigma^2 - 1 - log sigma^2).

    For batched (N, D) inputs the per-example KLs are summed over D and
    averaged over N.
    """
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be strictly positive")
    per = 0.5 * (mu**2 + sigma**2 - 1.0 - 2.0 * np.log(sigma))
    if per.ndim <= 1:
        return float(per.sum())
    return float(per.sum(axis=-1).mean())


def beta_at_epoch(epoch: int, beta: float, warmup_epochs: int) -> float:
    """Linear KL-weight warm-up: 0 -> beta over the first ``warmup_epochs`` epochs."""
    if warmup_epochs <= 0:
        return beta
    return beta * min(1.0, (epoch + 1) / warmup_epochs)
