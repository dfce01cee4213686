"""Frechet Audio Distance between embedding sets.

The score between two sets is the Frechet distance between Gaussians fit
to each:

    ||mu_a - mu_b||^2 + Tr(Sigma_a + Sigma_b - 2 (Sigma_a Sigma_b)^{1/2})

The trace term goes through the symmetrized product
Sigma_a^{1/2} Sigma_b Sigma_a^{1/2}, whose eigenvalues equal those of
Sigma_a Sigma_b but which stays symmetric, so the Jacobi solver in
:mod:`.linalg` applies at every step. Lower is better; identical sets
score 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingBackendId, EmbeddingSet
from .linalg import clamp_spectrum, jacobi_eigh, symmetric_sqrt

__all__ = [
    "GaussianStats",
    "FadScore",
    "BiasPoint",
    "fit_gaussian",
    "frechet_distance",
    "fad",
    "fad_bias_curve",
]

_SYMMETRY_TOL = 1e-9  # relative to the largest covariance entry
_EIG_FLOOR = 1e-8  # relative clamp window for slightly-negative eigenvalues
_SQRT_EPS = float(np.sqrt(np.finfo(np.float64).eps))


@dataclass
class GaussianStats:
    """Mean vector and covariance matrix summarizing one embedding set."""

    mean: np.ndarray
    cov: np.ndarray
    n: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match dim {mean.size}")
        if self.n < 2:
            raise ValueError("covariance needs at least 2 samples")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("non-finite entries in Gaussian stats")
        asym = float(np.max(np.abs(cov - cov.T))) if cov.size else 0.0
        scale = max(1.0, float(np.max(np.abs(cov)))) if cov.size else 1.0
        if asym >= _SYMMETRY_TOL * scale:
            raise ValueError(f"covariance asymmetry {asym:.3e} exceeds tolerance")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", (cov + cov.T) / 2.0)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class FadScore:
    value: float
    backend: EmbeddingBackendId | None
    n_eval: int
    n_ref: int

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise ValueError(f"FAD must be finite and >= 0, got {self.value}")


def fit_gaussian(embedding_set: EmbeddingSet) -> GaussianStats:
    """Column means and unbiased (N-1) covariance of an embedding set."""
    vectors = embedding_set.vectors.astype(np.float64)
    n = vectors.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 vectors to fit a covariance, got {n}")
    # canonicalize row order so the float accumulation (and thus the score)
    # is exactly invariant under permutations of the input set
    vectors = vectors[np.lexsort(vectors.T[::-1])]
    mean = vectors.mean(axis=0)
    centered = vectors - mean
    cov = centered.T @ centered / (n - 1)
    return GaussianStats(mean=mean, cov=(cov + cov.T) / 2.0, n=n)


def frechet_distance(
    a: GaussianStats, b: GaussianStats, backend: EmbeddingBackendId | None = None
) -> FadScore:
    """Frechet distance between two Gaussians; symmetric, 0 when a == b."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")

    sqrt_a = symmetric_sqrt(a.cov, _EIG_FLOOR)
    product = sqrt_a @ b.cov @ sqrt_a
    product = (product + product.T) / 2.0
    eigenvalues, _ = jacobi_eigh(product)
    trace_cross = float(np.sum(np.sqrt(clamp_spectrum(eigenvalues, _EIG_FLOOR))))

    diff = a.mean - b.mean
    trace_sum = float(np.trace(a.cov) + np.trace(b.cov))
    value = float(diff @ diff + trace_sum - 2.0 * trace_cross)
    if value < 0.0:
        # roundoff bound for the trace term: near-zero eigenvalues of the
        # product pick up O(eps * scale) noise that the square root turns
        # into O(sqrt(eps)) per dimension, so the floor must scale with
        # both the traces and the dimension
        floor = max(1e-8, a.dim * _SQRT_EPS) * max(1.0, trace_sum)
        if value < -floor:
            raise ValueError(
                f"assembled distance {value:.3e} is negative beyond roundoff; "
                "check the input covariances"
            )
        value = 0.0
    return FadScore(value=value, backend=backend, n_eval=a.n, n_ref=b.n)


def fad(eval_set: EmbeddingSet, ref_set: EmbeddingSet) -> FadScore:
    """FAD of an evaluation set against a reference set (lower is better)."""
    if (eval_set.backend.name, eval_set.backend.dim) != (
        ref_set.backend.name,
        ref_set.backend.dim,
    ):
        raise ValueError(
            f"backend mismatch: {eval_set.backend.name}/{eval_set.backend.dim} vs "
            f"{ref_set.backend.name}/{ref_set.backend.dim}"
        )
    return frechet_distance(
        fit_gaussian(eval_set), fit_gaussian(ref_set), backend=eval_set.backend
    )


@dataclass(frozen=True)
class BiasPoint:
    size: int
    mean_fad: float
    std_fad: float


def fad_bias_curve(
    eval_set: EmbeddingSet,
    ref_set: EmbeddingSet,
    sizes: list[int],
    repeats: int,
    seed: int,
) -> list[BiasPoint]:
    """FAD as a function of evaluation-set size.

    FAD estimated from samples is biased upward at small N, so scores at
    different set sizes are not comparable; this exposes the raw curve.
    For each size, the evaluation set is subsampled without replacement
    ``repeats`` times (derived seed per repeat) against the fixed
    reference. Deterministic given ``seed``.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    n = eval_set.n
    for size in sizes:
        if size < 2 or size > n:
            raise ValueError(f"subsample size {size} out of range [2, {n}]")

    ref_stats = fit_gaussian(ref_set)
    points = []
    for size in sizes:
        values = []
        for repeat in range(repeats):
            rng = np.random.default_rng(seed + repeat)
            rows = rng.choice(n, size=size, replace=False)
            subset = EmbeddingSet(
                backend=eval_set.backend,
                vectors=eval_set.vectors[rows],
                clip_ids=[eval_set.clip_ids[i] for i in rows],
            )
            score = frechet_distance(
                fit_gaussian(subset), ref_stats, backend=eval_set.backend
            )
            values.append(score.value)
        arr = np.asarray(values)
        std = float(arr.std(ddof=1)) if len(values) > 1 else 0.0
        points.append(BiasPoint(size=size, mean_fad=float(arr.mean()), std_fad=std))
    return points
