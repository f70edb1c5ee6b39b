"""Uniform sphere sampling and the spherical-cap measure.

The inner product t = <u, v> of two independent uniform points on the unit
sphere in R^d has density proportional to (1 - t^2)^((d-3)/2) on [-1, 1].
Everything here reduces to that one-dimensional marginal: the cap measure is
its upper tail, threshold calibration inverts the tail by bisection, and cap
sampling draws from the tail-restricted marginal.

All integrals run in the angle variable theta = arcsin(t), where the density
becomes cos(theta)^(d-2): smooth for every d >= 2 (no endpoint singularity at
d = 2) and safely evaluated in the log domain for large d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, InvalidParameterError
from .rng import generator

DEFAULT_CALIBRATION_TOL = 1e-12

# Threshold between the two cap-sampling strategies: above it, rejection from
# the full marginal is cheap; below it, the tail is thin enough that the
# tangent-line exponential envelope accepts at a healthy rate.
_CAP_REJECTION_MIN_P = 0.05

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(21)


@dataclass(frozen=True)
class UnitVectorSet:
    """n row vectors of unit Euclidean norm in dimension d."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        if data.ndim != 2:
            raise InvalidParameterError("vector set must be a 2-D array")
        n, d = data.shape
        if n < 1:
            raise InvalidParameterError("need at least one vector")
        if d < 2:
            raise InvalidParameterError(f"dimension must be >= 2, got {d}")
        norms = np.linalg.norm(data, axis=1)
        if not np.all(np.abs(norms - 1.0) <= 1e-12):
            worst = int(np.argmax(np.abs(norms - 1.0)))
            raise InvalidParameterError(
                f"row {worst} has norm {norms[worst]!r}, expected 1 within 1e-12"
            )

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class CapParams:
    """A calibrated cap: P(<u, v> >= tau) = p within tol, in dimension d."""

    tau: float
    p: float
    d: int
    tol: float = DEFAULT_CALIBRATION_TOL

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise InvalidParameterError(f"p must be in (0, 1), got {self.p}")
        if abs(self.tau) > 1.0:
            raise InvalidParameterError(f"tau must be in [-1, 1], got {self.tau}")
        if self.tol <= 0.0:
            raise InvalidParameterError("tol must be positive")
        achieved = abs(cap_probability(self.tau, self.d) - self.p)
        if achieved > self.tol:
            raise InvalidParameterError(
                f"cap not calibrated: |cap_probability(tau, d) - p| = {achieved:.3e} "
                f"exceeds tol = {self.tol:.3e}"
            )


def _validate_dimension(d) -> int:
    if int(d) != d or d < 2:
        raise InvalidParameterError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def sample_unit_vectors(n: int, d: int, seed: int) -> UnitVectorSet:
    """n i.i.d. uniform points on the unit sphere in R^d.

    Rows are independent standard normal draws normalized to unit length;
    bit-identical for identical (n, d, seed).
    """
    d = _validate_dimension(d)
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    rng = generator(seed)
    data = rng.standard_normal((n, d))
    norms = np.linalg.norm(data, axis=1, keepdims=True)
    return UnitVectorSet(data / norms)


def _adaptive_gauss_legendre(
    f, a: float, b: float, peak_width: float | None = None, rel_tol: float = 1e-15
) -> float:
    """Adaptive composite Gauss-Legendre quadrature of a smooth f >= 0.

    Starts from a partition graded geometrically away from the left endpoint
    at scale ``peak_width`` (the integrands here decay monotonically from
    there), then halves every panel until two successive composite totals
    agree to rel_tol.  Comparing full refinements avoids the plateau problem
    of local error estimates on sharply peaked integrands.
    """
    if b <= a:
        return 0.0
    edges = [a]
    if peak_width is not None and peak_width < (b - a) / 4.0:
        step = peak_width
        while edges[-1] + step < b:
            edges.append(edges[-1] + step)
            step *= 2.0
    edges.append(b)
    edges = np.asarray(edges)

    def composite(cuts: np.ndarray) -> float:
        lo, hi = cuts[:-1], cuts[1:]
        half = 0.5 * (hi - lo)
        points = 0.5 * (lo + hi)[:, None] + half[:, None] * _GL_NODES[None, :]
        values = f(points.ravel()).reshape(points.shape)
        return float(np.sum(half * (values @ _GL_WEIGHTS)))

    total = composite(edges)
    for _ in range(12):
        finer = np.empty(2 * edges.size - 1)
        finer[0::2] = edges
        finer[1::2] = 0.5 * (edges[:-1] + edges[1:])
        refined = composite(finer)
        done = abs(refined - total) <= rel_tol * abs(refined) + 1e-300
        total, edges = refined, finer
        if done:
            break
    return total


def _log_tail_integral(tau: float, d: int) -> float:
    """log of the unnormalized tail integral of cos(theta)^(d-2) above arcsin(tau).

    The integrand is rescaled to 1 at the lower endpoint (its maximum for
    tau >= 0) so the quadrature runs on well-conditioned values; the log of
    the scaling factor is added back at the end.
    """
    theta_lo = math.asin(tau)
    expo = d - 2
    log_cos_lo = 0.5 * math.log1p(-tau * tau)

    def scaled_density(theta):
        cos_t = np.maximum(np.cos(theta), 1e-308)
        return np.exp(expo * (np.log(cos_t) - log_cos_lo))

    tail = _adaptive_gauss_legendre(
        scaled_density, theta_lo, 0.5 * math.pi, peak_width=(d - 1) ** -0.5
    )
    if tail <= 0.0:
        return -math.inf
    return expo * log_cos_lo + math.log(tail)


# The normalizer (the gamma-function Beta constant) is evaluated with the
# same quadrature as the tail so that systematic quadrature error cancels in
# the ratio; lgamma differences alone would cost ~|lgamma| * eps ~ 1e-11 for
# large d.  Cached per dimension: calibration calls repeat the same d.
_LOG_HALF_INTEGRAL_CACHE: dict[int, float] = {}


def _log_norm_constant(d: int) -> float:
    log_half = _LOG_HALF_INTEGRAL_CACHE.get(d)
    if log_half is None:
        log_half = _log_tail_integral(0.0, d)
        _LOG_HALF_INTEGRAL_CACHE[d] = log_half
    return math.log(2.0) + log_half


def cap_probability(tau: float, d: int) -> float:
    """P(<u, v> >= tau) for independent uniform unit vectors in R^d.

    Computed as the normalized tail integral of cos(theta)^(d-2) over
    [arcsin(tau), pi/2]; accurate to about 1e-13 absolute.
    """
    d = _validate_dimension(d)
    tau = float(tau)
    if not (-1.0 <= tau <= 1.0) or math.isnan(tau):
        raise InvalidParameterError(f"tau must be in [-1, 1], got {tau}")
    if tau == 1.0:
        return 0.0
    if tau == -1.0:
        return 1.0
    if tau < 0.0:
        # the marginal is symmetric about 0
        return 1.0 - cap_probability(-tau, d)

    log_tail = _log_tail_integral(tau, d)
    if log_tail == -math.inf:
        return 0.0
    return float(math.exp(log_tail - _log_norm_constant(d)))


def calibrate_tau(
    p: float, d: int, tol: float = DEFAULT_CALIBRATION_TOL, max_iter: int = 200
) -> CapParams:
    """Find tau with |cap_probability(tau, d) - p| <= tol by bisection.

    The cap measure is monotone nonincreasing in tau, so plain bisection on
    [-1, 1] is robust even where the marginal density is tiny (p near 0 or 1).
    """
    d = _validate_dimension(d)
    if not (0.0 < p < 1.0):
        raise InvalidParameterError(f"p must be in (0, 1), got {p}")
    if tol <= 0.0:
        raise InvalidParameterError("tol must be positive")

    # Bisect all the way to a machine-width bracket rather than stopping at
    # |cap - p| <= tol: where the marginal density is tiny the p-tolerance is
    # met on a wide tau interval, and stopping early would lose the
    # cap_probability/calibrate_tau round-trip in tau space.
    lo, hi = -1.0, 1.0  # cap(lo) = 1 >= p >= 0 = cap(hi)
    mid = 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        value = cap_probability(mid, d)
        if value == p or hi - lo <= 5e-16:
            break
        if value > p:
            lo = mid
        else:
            hi = mid
    achieved = abs(cap_probability(mid, d) - p)
    if achieved > tol:
        raise CalibrationError(
            f"bisection stalled at |cap - p| = {achieved:.3e} > tol = {tol:.3e} "
            f"for p={p}, d={d}; last bracket [{lo}, {hi}]",
            bracket=(lo, hi),
        )
    return CapParams(tau=mid, p=p, d=d, tol=tol)


def _sample_tail_inner_products(cap: CapParams, count: int, rng) -> np.ndarray:
    """Draw `count` values of t from the marginal restricted to [tau, 1].

    Two exact rejection schemes: for moderate p, propose from the full
    marginal (2*Beta(a, a) - 1) and keep the tail; for thin tails, propose the
    angle offset from a truncated exponential matching the log-density's
    tangent at theta = arcsin(tau) (valid envelope by concavity of log cos).
    """
    d, tau = cap.d, cap.tau
    out = np.empty(count)
    filled = 0
    if cap.p >= _CAP_REJECTION_MIN_P:
        a = (d - 1) / 2.0
        while filled < count:
            m = int((count - filled) / cap.p * 1.2) + 16
            t = 2.0 * rng.beta(a, a, size=m) - 1.0
            kept = t[t >= tau]
            take = min(kept.size, count - filled)
            out[filled : filled + take] = kept[:take]
            filled += take
        return out

    theta_lo = math.asin(tau)
    span = 0.5 * math.pi - theta_lo
    expo = d - 2
    rate = expo * math.tan(theta_lo)
    log_cos_lo = 0.5 * math.log1p(-tau * tau)
    while filled < count:
        m = 2 * (count - filled) + 16
        u = rng.random(m)
        if rate > 0.0:
            offset = -np.log1p(-u * (-np.expm1(-rate * span))) / rate
        else:
            offset = u * span
        theta = theta_lo + offset
        cos_t = np.maximum(np.cos(theta), 1e-308)
        log_accept = expo * (np.log(cos_t) - log_cos_lo) + rate * offset
        kept = theta[np.log(rng.random(m)) < log_accept]
        take = min(kept.size, count - filled)
        out[filled : filled + take] = np.sin(kept[:take])
        filled += take
    return out


def _unit_vectors_orthogonal_to(base: np.ndarray, rng) -> np.ndarray:
    """One uniform unit vector orthogonal to each unit row of `base`."""
    noise = rng.standard_normal(base.shape)
    noise -= np.sum(noise * base, axis=1, keepdims=True) * base
    norms = np.linalg.norm(noise, axis=1, keepdims=True)
    return noise / norms


def sample_cap_batch(points: np.ndarray, cap: CapParams, seed: int) -> np.ndarray:
    """For each unit row x, one uniform point of {y : <x, y> >= tau}.

    The inner product t comes from the tail-restricted marginal and the
    tangential part is an independent uniform direction orthogonal to x.
    """
    points = np.asarray(points, dtype=np.float64)
    squeeze = points.ndim == 1
    if squeeze:
        points = points[None, :]
    if points.shape[1] != cap.d:
        raise InvalidParameterError(
            f"points have dimension {points.shape[1]}, cap calibrated for d={cap.d}"
        )
    norms = np.linalg.norm(points, axis=1)
    if not np.all(np.abs(norms - 1.0) <= 1e-12):
        raise InvalidParameterError("every base point must have unit norm within 1e-12")

    rng = generator(seed)
    t = _sample_tail_inner_products(cap, points.shape[0], rng)[:, None]
    tangent = _unit_vectors_orthogonal_to(points, rng)
    result = t * points + np.sqrt(np.maximum(1.0 - t * t, 0.0)) * tangent
    return result[0] if squeeze else result


def sample_cap(x: np.ndarray, cap: CapParams, seed: int) -> np.ndarray:
    """Uniform point in the measure-p cap around the unit vector x."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidParameterError("x must be a single vector")
    return sample_cap_batch(x, cap, seed)
