"""Stationary point of phi(., delta) and the critical sample sizes it implies.

For 0 < delta < 1 the map x -> phi(x, delta) rises on (0, x0) and falls
afterwards.  x0 = sqrt(log a1) where a1 is the unique root of ``h_poly`` on
(1, inf).  The root is bracketed from below by ``a0_lower`` and located by
bisection on log(a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .numerics import DomainError, _h_from_log, h_poly_scaled

MAX_DOUBLINGS = 200
_LOG_SPACE_FROM = math.log(1e12)


class BracketOverflow(OverflowError):
    """No sign change of h found within the doubling budget."""


@dataclass(frozen=True)
class CriticalPoint:
    delta: float
    a1: float
    x0: float
    lower_bracket: float  # closed-form lower bound on x0**2
    # bisection bracket on log(a1)
    log_a1_lo: float
    log_a1_hi: float

    @property
    def x0_sq(self) -> float:
        return self.x0 * self.x0


def x0_sq_lower_bound(delta: float) -> float:
    """max{3/2, 2 log(1/(1 - delta))}, the closed-form lower bound on x0**2."""
    return max(1.5, -2.0 * math.log1p(-delta))


def a0_lower(delta: float) -> float:
    """Location of the maximum of h; always at least e^{3/2}."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"a0_lower requires 0 < delta < 1, got {delta}")
    return math.exp(_log_a0(delta))


def _log_a0(delta: float) -> float:
    return math.log((2.0 + delta) / (2.0 * (1.0 - delta))) / (delta - 0.5 * delta * delta)


def _h_sign(log_a: float, delta: float) -> float:
    if log_a > _LOG_SPACE_FROM:
        return h_poly_scaled(log_a, delta)
    return _h_from_log(log_a, delta)


def find_critical(delta: float, tol: float = 1e-13) -> CriticalPoint | None:
    """Locate the stationary point of phi(., delta).

    Returns ``None`` for delta >= 1, where phi is increasing on the whole
    half-line and no critical point exists.
    """
    if not delta > 0.0:
        raise DomainError(f"find_critical requires delta > 0, got {delta}")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    if delta >= 1.0:
        return None
    lo = _log_a0(delta)
    step = math.log(2.0)
    hi = lo
    for _ in range(MAX_DOUBLINGS):
        hi += step
        if _h_sign(hi, delta) < 0.0:
            break
    else:
        raise BracketOverflow(f"could not bracket the root of h for delta={delta}")
    # h(a0) > 0 because h rises from h(1) = 0 up to a0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _h_sign(mid, delta) > 0.0:
            lo = mid
        else:
            hi = mid
    log_a1 = 0.5 * (lo + hi)
    return CriticalPoint(
        delta=delta,
        a1=math.exp(log_a1) if log_a1 < 709.0 else math.inf,
        x0=math.sqrt(log_a1),
        lower_bracket=x0_sq_lower_bound(delta),
        log_a1_lo=lo,
        log_a1_hi=hi,
    )


def gaussian_critical_n(delta: float, snr_inv: float, tol: float = 1e-13) -> float:
    """Continuous sample size at which one Gaussian coordinate's gap term peaks.

    ``snr_inv`` is sigma/mu for the coordinate; the result is x0^2 * snr_inv^2.
    Infinite when delta >= 1 (the term never peaks).
    """
    if snr_inv <= 0:
        raise DomainError("snr_inv must be positive")
    cp = find_critical(delta, tol)
    if cp is None:
        return math.inf
    return cp.x0_sq * snr_inv * snr_inv


def bernoulli_critical_n(delta: float, tau: float, tol: float = 1e-13) -> float:
    """Peak location of one Bernoulli strip-center term: x0^2 (1/tau^2 - 1)."""
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0, 1), got {tau}")
    cp = find_critical(delta, tol)
    if cp is None:
        return math.inf
    return cp.x0_sq * (1.0 / (tau * tau) - 1.0)


class Regime(str, Enum):
    WEAK = "Weak"
    STRONG = "Strong"
    INDETERMINATE = "Indeterminate"


class DegenerateModelError(ValueError):
    """Every class-mean coordinate is zero, so there is no signal to analyse."""


@dataclass(frozen=True)
class RegimeReport:
    """Regime label plus monotonicity brackets on the training-set size n.

    ``increasing_until``: the gap (or strip center) is strictly increasing
    for n below this closed-form value.  ``decreasing_from``: largest
    per-coordinate peak location; beyond it every coordinate term decreases.
    Both are None outside the weak regime.
    """

    regime: Regime
    increasing_until: float | None = None
    decreasing_from: float | None = None
    per_coordinate_critical: tuple[float, ...] = ()
