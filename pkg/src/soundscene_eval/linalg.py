"""Symmetric eigendecomposition via cyclic Jacobi rotations.

Self-contained solver for the symmetric matrices that show up in the
Frechet-distance trace term. Operating only on symmetric matrices keeps
the decomposition real and stable, which is why the distance code routes
everything through a symmetrized product before calling in here.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["jacobi_eigh", "ConvergenceError", "symmetric_sqrt", "clamp_spectrum"]

_MAX_SWEEPS = 100
_TOL_SCALE = 1e-12  # convergence threshold relative to ||A||_F


class ConvergenceError(RuntimeError):
    """Jacobi sweeps did not drive the off-diagonal below tolerance."""


def _off_diagonal_norm(a: np.ndarray) -> float:
    # summed directly over the off-diagonal entries; subtracting the
    # diagonal from the full Frobenius norm cancels catastrophically
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off, "fro"))


def jacobi_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues, eigenvectors) with eigenvalues ascending and
    eigenvectors in the corresponding columns. Converged when the
    off-diagonal Frobenius norm falls below 1e-12 * ||A||_F, with a cap of
    100 sweeps.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-9 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2.0

    v = np.eye(n)
    threshold = _TOL_SCALE * float(np.linalg.norm(a, "fro"))
    if n == 1 or _off_diagonal_norm(a) <= threshold:
        return _sorted_eig(np.diag(a).copy(), v)

    for _ in range(_MAX_SWEEPS):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # rotation angle that zeroes a[p,q] (overflow-safe form)
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e153:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
        if _off_diagonal_norm(a) <= threshold:
            return _sorted_eig(np.diag(a).copy(), v)

    raise ConvergenceError(
        f"off-diagonal norm {_off_diagonal_norm(a):.3e} still above "
        f"{threshold:.3e} after {_MAX_SWEEPS} sweeps"
    )


def _sorted_eig(values: np.ndarray, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(values, kind="stable")
    return values[order], vectors[:, order]


def symmetric_sqrt(matrix: np.ndarray, eig_floor: float = 1e-8) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix.

    Eigenvalues in [-eig_floor * lambda_max, 0) are treated as roundoff and
    clamped to zero; anything more negative raises, since that points at a
    genuinely non-PSD input rather than noise.
    """
    values, vectors = jacobi_eigh(matrix)
    clamped = clamp_spectrum(values, eig_floor)
    return (vectors * np.sqrt(clamped)) @ vectors.T


def clamp_spectrum(values: np.ndarray, eig_floor: float = 1e-8) -> np.ndarray:
    """Zero out slightly-negative eigenvalues; reject clearly negative ones."""
    lam_max = float(values.max(initial=0.0))
    tolerance = eig_floor * max(lam_max, 0.0)
    if float(values.min()) < -tolerance:
        raise ValueError(
            f"matrix is not PSD: eigenvalue {values.min():.6e} below "
            f"tolerance {-tolerance:.6e}"
        )
    return np.maximum(values, 0.0)
