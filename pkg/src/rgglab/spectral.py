"""Dense symmetric spectra, empirical spectral distributions, reference laws.

Eigenvalues come from the LAPACK symmetric solver behind numpy (accuracy well
inside the 1e-8 relative contract for the sizes used here, n <= ~6000).
Moments are always computed from eigenvalues, never by matrix powering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

MAX_DENSE_N = 6500


@dataclass(frozen=True)
class Histogram:
    """Fixed-range histogram with out-of-range mass reported separately."""

    bin_edges: np.ndarray
    counts: np.ndarray
    below: int
    above: int

    @property
    def bins(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return int(self.counts.sum()) + self.below + self.above

    def densities(self) -> np.ndarray:
        widths = np.diff(self.bin_edges)
        total = self.total()
        return self.counts / (total * widths) if total else np.zeros_like(widths)


@dataclass(frozen=True)
class SpectralSummary:
    """Sorted eigenvalues with their ESD histogram, scaled moments, and
    second eigenvalue max(|lambda_2|, |lambda_n|) (descending order)."""

    eigenvalues: np.ndarray
    scale: float
    esd: Histogram
    moments: dict[int, float]
    lambda_second: float


def eigenvalues_symmetric(matrix: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense symmetric real matrix, sorted ascending."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidParameterError("matrix must be square")
    n = matrix.shape[0]
    if n > MAX_DENSE_N:
        raise InvalidParameterError(
            f"dense solver capped at n={MAX_DENSE_N}, got {n}"
        )
    tolerance = 1e-12 * max(1.0, float(np.abs(matrix).max()))
    asymmetry = float(np.abs(matrix - matrix.T).max())
    if asymmetry > tolerance:
        raise InvalidParameterError(
            f"matrix asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}"
        )
    return np.linalg.eigvalsh(matrix)


def esd_histogram(
    eigenvalues: np.ndarray,
    scale: float = 1.0,
    bins: int = 61,
    value_range: tuple[float, float] = (-3.0, 3.0),
) -> Histogram:
    """Histogram of eigenvalues/scale over a fixed range."""
    if bins < 1:
        raise InvalidParameterError("bins must be >= 1")
    lo, hi = value_range
    if not lo < hi:
        raise InvalidParameterError("histogram range must satisfy lo < hi")
    if scale <= 0.0:
        raise InvalidParameterError("scale must be positive")
    values = np.asarray(eigenvalues, dtype=np.float64) / scale
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    return Histogram(
        bin_edges=edges,
        counts=counts,
        below=int((values < lo).sum()),
        above=int((values > hi).sum()),
    )


def semicircle_cdf(x):
    """CDF of the semicircle law supported on [-2, 2].

    Accepts scalars or arrays: 1/2 + x sqrt(4 - x^2) / (4 pi) + arcsin(x/2) / pi
    inside the support, clamped to {0, 1} outside.
    """
    x = np.asarray(x, dtype=np.float64)
    clipped = np.clip(x, -2.0, 2.0)
    inner = (
        0.5
        + clipped * np.sqrt(4.0 - clipped * clipped) / (4.0 * math.pi)
        + np.arcsin(clipped / 2.0) / math.pi
    )
    result = np.where(x <= -2.0, 0.0, np.where(x >= 2.0, 1.0, inner))
    return float(result) if result.ndim == 0 else result


def ks_distance(eigenvalues: np.ndarray, scale: float, reference_cdf) -> float:
    """Kolmogorov-Smirnov distance between the ESD of eigenvalues/scale and a
    reference CDF: both one-sided suprema of the right-continuous empirical CDF
    evaluated at the sorted sample."""
    values = np.sort(np.asarray(eigenvalues, dtype=np.float64) / scale)
    n = values.size
    if n == 0:
        raise InvalidParameterError("need at least one eigenvalue")
    reference = np.asarray(reference_cdf(values), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - reference))
    d_minus = float(np.max(reference - (grid - 1.0 / n)))
    return max(d_plus, d_minus, 0.0)


def empirical_moment(eigenvalues: np.ndarray, k: int, scale: float = 1.0) -> float:
    """(1/n) sum (lambda_i / scale)^k."""
    if k < 1:
        raise InvalidParameterError("moment order must be >= 1")
    values = np.asarray(eigenvalues, dtype=np.float64) / scale
    return float(np.mean(values**k))


def second_eigenvalue(eigenvalues: np.ndarray) -> float:
    """max(|lambda_2|, |lambda_n|) with eigenvalues ordered descending."""
    values = np.sort(np.asarray(eigenvalues, dtype=np.float64))[::-1]
    if values.size < 2:
        raise InvalidParameterError("need at least two eigenvalues")
    return max(abs(float(values[1])), abs(float(values[-1])))


def spectral_summary(
    eigenvalues: np.ndarray,
    scale: float = 1.0,
    bins: int = 61,
    value_range: tuple[float, float] = (-3.0, 3.0),
    moment_orders: tuple[int, ...] = (1, 2, 3, 4, 5, 6),
) -> SpectralSummary:
    """Bundle eigenvalues, ESD histogram, scaled moments, and lambda(A)."""
    eigenvalues = np.sort(np.asarray(eigenvalues, dtype=np.float64))
    return SpectralSummary(
        eigenvalues=eigenvalues,
        scale=scale,
        esd=esd_histogram(eigenvalues, scale, bins, value_range),
        moments={k: empirical_moment(eigenvalues, k, scale) for k in moment_orders},
        lambda_second=second_eigenvalue(eigenvalues),
    )


def ecdf_sup_distance(first: np.ndarray, second: np.ndarray) -> float:
    """Sup-norm distance between the empirical CDFs of two samples."""
    first = np.sort(np.asarray(first, dtype=np.float64))
    second = np.sort(np.asarray(second, dtype=np.float64))
    support = np.concatenate([first, second])
    cdf_first = np.searchsorted(first, support, side="right") / first.size
    cdf_second = np.searchsorted(second, support, side="right") / second.size
    return float(np.max(np.abs(cdf_first - cdf_second)))
