"""Rank/linear correlation with two-sided t-test p-values.

Self-contained: ranks with average tie handling, Pearson and Spearman
coefficients, and the Student-t tail probability through a
continued-fraction evaluation of the regularized incomplete beta
function. The t-approximation (t = r*sqrt((n-2)/(1-r^2)), df = n-2) is
used for both coefficients' p-values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CorrelationMethod",
    "CorrelationResult",
    "rank",
    "spearman",
    "pearson",
    "t_two_sided",
    "regularized_incomplete_beta",
]


class CorrelationMethod(str, enum.Enum):
    SPEARMAN = "spearman"
    PEARSON = "pearson"


@dataclass(frozen=True)
class CorrelationResult:
    coefficient: float
    p_value: float
    n: int
    method: CorrelationMethod

    def __post_init__(self):
        if not -1.0 <= self.coefficient <= 1.0:
            raise ValueError(f"coefficient out of [-1, 1]: {self.coefficient}")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value out of [0, 1]: {self.p_value}")


def rank(values: list[float] | np.ndarray) -> np.ndarray:
    """Ascending ranks starting at 1; ties get the average of their block."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot rank an empty sequence")
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson_coefficient(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise ValueError("zero variance input")
    return float(np.clip(float(xc @ yc) / denom, -1.0, 1.0))


def _p_from_r(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return t_two_sided(t, n - 2)


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"inputs must be equal-length vectors, got {x.shape}, {y.shape}")
    if x.size < 3:
        raise ValueError(f"need n >= 3 for a p-value, got n = {x.size}")
    return x, y


def spearman(x: list[float] | np.ndarray, y: list[float] | np.ndarray) -> CorrelationResult:
    """Spearman's rho: Pearson correlation of the rank vectors."""
    x, y = _check_pair(x, y)
    rho = _pearson_coefficient(rank(x), rank(y))
    return CorrelationResult(
        coefficient=rho, p_value=_p_from_r(rho, x.size), n=x.size,
        method=CorrelationMethod.SPEARMAN,
    )


def pearson(x: list[float] | np.ndarray, y: list[float] | np.ndarray) -> CorrelationResult:
    """Product-moment correlation with a two-sided t-test p-value."""
    x, y = _check_pair(x, y)
    r = _pearson_coefficient(x, y)
    return CorrelationResult(
        coefficient=r, p_value=_p_from_r(r, x.size), n=x.size,
        method=CorrelationMethod.PEARSON,
    )


def t_two_sided(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if t == 0.0:
        return 1.0
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


_MAX_ITERATIONS = 200
_EPSILON = 1e-10
_TINY = 1e-300


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) by the Lentz continued fraction (rel. error < 1e-8)."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the continued fraction converges fast only on one side of the
    # mean-ish split point; use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation with zero-guarding
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITERATIONS + 1):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + numerator / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + numerator / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPSILON:
            return h
    raise RuntimeError(
        f"incomplete beta did not converge in {_MAX_ITERATIONS} iterations "
        f"(a={a}, b={b}, x={x})"
    )
