"""Exact analysis of the Bernoulli classification model.

Data: y uniform on {-1, +1}; each coordinate x(j) equals y theta(j) with
probability (1 + tau)/2 and -y theta(j) otherwise.  For n training points
u(j) = theta(j) (2S - n) / n with S ~ Bin(n, (1 + tau)/2), so every expected
quantity is a finite binomial sum.

Classifier conventions use sign(0) = 0.  At the lattice atoms u(j) = +-eps the
robust classifier is zero, which contributes half weight; ``exact_gap`` keeps
those terms so that it equals the expectation the Monte Carlo engine samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import binom_pmf_all, heaviside, phi_gap
from .phase import (
    DegenerateModelError,
    Regime,
    RegimeReport,
    bernoulli_critical_n,
)

# (sqrt(10) + 3) / (6 sqrt(2 pi)), Berry-Esseen constant for two-point laws
BERRY_ESSEEN_C0 = (math.sqrt(10.0) + 3.0) / (6.0 * math.sqrt(2.0 * math.pi))


@dataclass(frozen=True)
class BernoulliSpec:
    W: float
    theta: tuple[float, ...]
    tau: float
    eps: float

    def __post_init__(self):
        theta = tuple(float(t) for t in np.atleast_1d(self.theta))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "W", float(self.W))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "eps", float(self.eps))
        if not self.W > 0:
            raise ValueError("W must be positive")
        if len(theta) == 0:
            raise ValueError("theta must be non-empty")
        if any(not t >= 0 for t in theta):
            raise ValueError("theta entries must be non-negative")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if not self.eps >= 0:
            raise ValueError("eps must be non-negative")

    @property
    def d(self) -> int:
        return len(self.theta)

    @property
    def p(self) -> float:
        return 0.5 * (1.0 + self.tau)

    def active_theta(self) -> np.ndarray:
        t = np.asarray(self.theta)
        return t[t > 0]


@dataclass(frozen=True)
class StripPoint:
    n: int
    gap: float
    center: float
    halfwidth: float

    @property
    def contained(self) -> bool:
        return abs(self.gap - self.center) <= self.halfwidth


def lattice_u(theta: float, n: int) -> np.ndarray:
    """u = theta (2S - n) / n for S = 0..n; the Monte Carlo path uses the same expression."""
    s = np.arange(n + 1, dtype=float)
    return theta * (2.0 * s - n) / n


def gap_weights(u: np.ndarray, eps: float) -> np.ndarray:
    """E-weight of sign(u) - sign(u - eps sign(u)) divided by 2."""
    w = np.zeros_like(u)
    w[(u > 0) & (u < eps)] = 1.0
    w[(u < 0) & (u > -eps)] = -1.0
    if eps > 0:
        w[u == eps] = 0.5
        w[u == -eps] = -0.5
    return w


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return int(n)


def exact_gap(spec: BernoulliSpec, n: int) -> float:
    n = _check_n(n)
    if spec.eps == 0:
        return 0.0
    pmf = binom_pmf_all(n, spec.p)
    total = 0.0
    for t in spec.active_theta():
        total += t * float(np.dot(gap_weights(lattice_u(t, n), spec.eps), pmf))
    return 2.0 * spec.W * spec.tau * total


def strip_center(spec: BernoulliSpec, n) -> float:
    """Normal-approximation proxy s_n = 2 W tau sum_j theta_j phi(tau sqrt(n)/sqrt(1-tau^2), eps/(theta_j tau))."""
    tau = spec.tau
    x = tau * np.sqrt(np.asarray(n, dtype=float)) / math.sqrt(1.0 - tau * tau)
    total = 0.0
    for t in spec.active_theta():
        total = total + t * phi_gap(x, spec.eps / (t * tau))
    return 2.0 * spec.W * tau * total


def strip_halfwidth(spec: BernoulliSpec, n) -> float:
    tau = spec.tau
    l1 = float(np.sum(spec.theta))
    return (8.0 * BERRY_ESSEEN_C0 * spec.W * tau * l1 * (tau * tau + 1.0)
            / (np.sqrt(np.asarray(n, dtype=float)) * math.sqrt(1.0 - tau * tau)))


def strip_point(spec: BernoulliSpec, n: int) -> StripPoint:
    return StripPoint(n, exact_gap(spec, n), float(strip_center(spec, n)),
                      float(strip_halfwidth(spec, n)))


def gap_limit(spec: BernoulliSpec) -> float:
    tau = spec.tau
    return 2.0 * spec.W * tau * sum(
        t * heaviside(spec.eps / (t * tau) - 1.0) for t in spec.active_theta())


def regime(spec: BernoulliSpec) -> RegimeReport:
    theta = spec.active_theta()
    if theta.size == 0:
        raise DegenerateModelError("all theta coordinates are zero")
    eps, tau = spec.eps, spec.tau
    crit = tuple(
        bernoulli_critical_n(eps / (t * tau), tau) if t > 0 and eps > 0 else math.nan
        for t in spec.theta
    )
    if eps == 0:
        return RegimeReport(Regime.INDETERMINATE, per_coordinate_critical=crit)
    ratio = eps / tau
    if ratio < theta.min():
        smallest_log = min(-math.log1p(-eps / (t * tau)) for t in theta)
        until = (1.0 / tau ** 2 - 1.0) * max(1.5, 2.0 * smallest_log)
        return RegimeReport(
            Regime.WEAK,
            increasing_until=until,
            decreasing_from=max(c for c in crit if not math.isnan(c)),
            per_coordinate_critical=crit,
        )
    if ratio >= theta.max():
        return RegimeReport(Regime.STRONG, per_coordinate_critical=crit)
    return RegimeReport(Regime.INDETERMINATE, per_coordinate_critical=crit)


def _signed_mass(spec: BernoulliSpec, n: int) -> float:
    # Pr[S > n/2] - Pr[S < n/2], identical for every theta_j > 0
    pmf = binom_pmf_all(n, spec.p)
    s = np.arange(n + 1)
    return float(pmf[2 * s > n].sum() - pmf[2 * s < n].sum())


def test_loss_standard(spec: BernoulliSpec, n: int) -> float:
    n = _check_n(n)
    return -spec.W * spec.tau * float(spec.active_theta().sum()) * _signed_mass(spec, n)


def test_loss_robust(spec: BernoulliSpec, n: int) -> float:
    return test_loss_standard(spec, n) + exact_gap(spec, n)


test_loss_standard.__test__ = False
test_loss_robust.__test__ = False
