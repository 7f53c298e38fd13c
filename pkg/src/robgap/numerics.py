"""Special functions and discrete distributions used throughout the package.

Everything here is a pure function.  Array arguments are accepted wherever
the operation is naturally elementwise (``std_normal_cdf``, ``phi_gap``).
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special, stats

SQRT2 = math.sqrt(2.0)

# Above this n the exact integer binomial coefficient no longer fits a double.
_EXACT_COMB_MAX_N = 1000


class DomainError(ValueError):
    """Argument outside the domain of a numerical routine."""


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError(f"non-finite argument: {x!r}")


def std_normal_cdf(x):
    """Standard normal CDF, evaluated through erfc so both tails keep full relative precision."""
    _check_finite(x)
    out = 0.5 * special.erfc(-np.asarray(x, dtype=float) / SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def std_normal_sf(x):
    """Upper tail 1 - Phi(x)."""
    _check_finite(x)
    out = 0.5 * special.erfc(np.asarray(x, dtype=float) / SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def cdf_diff(a, b):
    """Phi(a) - Phi(b) without cancellation.

    Uses upper tails when both points sit right of 1, lower tails when both
    sit left of -1, and erf differences in between.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    right = lo > 1.0
    left = hi < -1.0
    mid = ~(right | left)
    out = np.empty(np.broadcast(a, b).shape)
    a, b = np.broadcast_arrays(a, b)
    # Q(b) - Q(a)
    out[right] = 0.5 * (special.erfc(b[right] / SQRT2) - special.erfc(a[right] / SQRT2))
    out[left] = 0.5 * (special.erfc(-a[left] / SQRT2) - special.erfc(-b[left] / SQRT2))
    out[mid] = 0.5 * (special.erf(a[mid] / SQRT2) - special.erf(b[mid] / SQRT2))
    return out


def phi_gap(x, delta):
    """phi(x, delta) = 2 Phi(x) - Phi(x(1+delta)) - Phi(x(1-delta)).

    ``x`` and ``delta`` broadcast against each other.  Requires x >= 0 and
    delta >= 0 (delta = 0 gives identically zero).
    """
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    _check_finite(x)
    _check_finite(delta)
    if np.any(x < 0):
        raise DomainError("phi_gap requires x >= 0")
    if np.any(delta < 0):
        raise DomainError("phi_gap requires delta >= 0")
    out = cdf_diff(x, x * (1.0 + delta)) + cdf_diff(x, x * (1.0 - delta))
    return float(out) if out.ndim == 0 else out


def h_poly(a: float, delta: float) -> float:
    """Auxiliary polynomial whose sign at a = exp(x^2) is the sign of d phi / dx.

    h(a) = -delta + (delta - 1) a^(2 delta) + 2 a^(delta (delta + 2) / 2) - 1.
    The constants cancel exactly, so it is evaluated as
    2 expm1(c log a) - (1 - delta) expm1(2 delta log a), which keeps relative
    accuracy when delta is small.
    """
    if not (math.isfinite(a) and math.isfinite(delta)):
        raise DomainError("h_poly requires finite arguments")
    if a < 1.0:
        raise DomainError(f"h_poly requires a >= 1, got {a}")
    return _h_from_log(math.log(a), delta)


def _h_from_log(log_a: float, delta: float) -> float:
    c = 0.5 * delta * (delta + 2.0)
    return 2.0 * math.expm1(c * log_a) - (1.0 - delta) * math.expm1(2.0 * delta * log_a)


def h_poly_scaled(log_a: float, delta: float) -> float:
    """h(e^log_a) * exp(-2 delta log_a): same sign as h, no overflow for huge a."""
    c = 0.5 * delta * (delta + 2.0)
    e = math.exp(-2.0 * delta * log_a)
    return 2.0 * (math.exp((c - 2.0 * delta) * log_a) - e) - (1.0 - delta) * (1.0 - e)


def phi_gap_tail(x, delta):
    """H(delta - 1) - phi(x, delta), the distance of phi from its large-x limit.

    Written with upper tails only, so it keeps relative precision after phi
    itself has rounded to its limit.  Negative when delta < 1.
    """
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    _check_finite(x)
    _check_finite(delta)
    if np.any(x < 0) or np.any(delta < 0):
        raise DomainError("phi_gap_tail requires x >= 0 and delta >= 0")
    x, delta = np.broadcast_arrays(x, delta)
    weak = delta < 1.0
    # delta > 1: 1 - phi = 2Q(x) - Q(x(1+delta)) + Q(x(delta-1)); delta = 1: 1/2 - phi = 2Q(x) - Q(2x)
    strong = 2.0 * std_normal_sf(x) - std_normal_sf(x * (1.0 + delta))
    strong = strong + np.where(delta > 1.0, std_normal_sf(x * np.abs(delta - 1.0)), 0.0)
    out = np.where(weak, -np.asarray(phi_gap(x, np.where(weak, delta, 0.0))), strong)
    return float(out) if out.ndim == 0 else out


def heaviside(x: float) -> float:
    if x > 0:
        return 1.0
    if x < 0:
        return 0.0
    return 0.5


def binom_pmf(n: int, p: float, k: int) -> float:
    """Binomial probability mass Pr[Bin(n, p) = k]; zero outside 0..n."""
    if n < 0:
        raise DomainError("n must be non-negative")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if k < 0 or k > n:
        return 0.0
    q = 1.0 - p
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if q == 0.0:
        return 1.0 if k == n else 0.0
    if n <= _EXACT_COMB_MAX_N:
        pk = p ** k
        qk = q ** (n - k)
        if pk > 1e-290 and qk > 1e-290:
            return float(math.comb(n, k)) * pk * qk
    return float(stats.binom.pmf(k, n, p))


def binom_pmf_all(n: int, p: float) -> np.ndarray:
    """Vector of Pr[Bin(n, p) = k] for k = 0..n."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    # a plain log-gamma difference loses ~1e-10 absolute by n = 1e5
    return stats.binom.pmf(np.arange(n + 1), n, p)


def poisson_pmf(lam: float, k: int) -> float:
    if lam <= 0:
        raise DomainError("Poisson rate must be positive")
    if k < 0:
        return 0.0
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))
