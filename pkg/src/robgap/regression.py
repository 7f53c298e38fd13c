"""Ordinary and adversarially robust linear regression.

The robust estimator minimises sum_i sum_j (|y_i - w(j) x_i(j)| + eps |w(j)|)^2,
which decouples across coordinates.  Each coordinate is a convex piecewise
quadratic in one variable, solved exactly by ``robust_fit_1d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .kernels import robust_fit_batch
from .numerics import poisson_pmf
from .sampler import (
    REGRESSION_STREAM,
    McEstimate,
    run_blocks,
    sample_shifted_poisson,
    substream,
    summarize,
)


class RankDeficientError(np.linalg.LinAlgError):
    """X^T X is singular."""


class HypothesisError(ValueError):
    """Arguments fall outside the range the closed form is valid for."""


@dataclass(frozen=True)
class StandardNormal:
    @property
    def label(self) -> str:
        return "normal"


@dataclass(frozen=True)
class ShiftedPoisson:
    """x - 1 ~ Poisson(lam); the shift keeps x away from zero."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("Poisson rate must be positive")

    @property
    def label(self) -> str:
        return f"poisson({self.lam:g})+1"


InputDist = Union[StandardNormal, ShiftedPoisson]


@dataclass(frozen=True)
class RegressionSpec:
    w_star: tuple[float, ...]
    noise_var: float
    input_dist: InputDist
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "w_star", tuple(float(w) for w in np.atleast_1d(self.w_star)))
        object.__setattr__(self, "noise_var", float(self.noise_var))
        object.__setattr__(self, "eps", float(self.eps))
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")
        if not self.eps >= 0:
            raise ValueError("eps must be non-negative")

    @property
    def d(self) -> int:
        return len(self.w_star)


@dataclass(frozen=True)
class Dataset:
    xs: np.ndarray  # (n, d)
    ys: np.ndarray  # (n,)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim == 1:
            xs = xs[:, None]
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape[0] != ys.shape[0]:
            raise ValueError("xs and ys must have the same number of rows")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)


def ols_fit(data: Dataset) -> np.ndarray:
    X, y = data.xs, data.ys
    gram = X.T @ X
    if np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise RankDeficientError("X^T X is singular")
    return np.linalg.solve(gram, X.T @ y)


def robust_objective(xs, ys, eps: float, w):
    """F(w) = sum_i (|y_i - w x_i| + eps |w|)^2; ``w`` may be an array."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    w = np.asarray(w, dtype=float)
    r = np.abs(ys - np.multiply.outer(w, xs)) + eps * np.abs(w)[..., None]
    return (r * r).sum(axis=-1)


def robust_fit_1d(xs, ys, eps: float) -> float:
    """Global minimiser of F(w); ties resolve to the smallest |w|, then smallest w."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    xs = np.asarray(xs, dtype=float).reshape(1, -1)
    ys = np.asarray(ys, dtype=float).reshape(1, -1)
    if xs.shape != ys.shape:
        raise ValueError("xs and ys must have the same length")
    return float(robust_fit_batch(xs, ys, eps)[0])


def robust_fit(data: Dataset, eps: float) -> np.ndarray:
    X, y = data.xs, data.ys
    return np.array([robust_fit_1d(X[:, j], y, eps) for j in range(X.shape[1])])


def wrob1_closed_form(x1: float, y1: float, eps: float) -> float:
    """Robust fit on a single point: y1/x1 when |x1| > eps, otherwise 0.

    At |x1| == eps every w between 0 and y1/x1 is optimal; the tie rule of
    ``robust_fit_1d`` picks 0.
    """
    if abs(x1) > eps and x1 != 0.0:
        return y1 / x1
    return 0.0


def population_second_moment(dist: InputDist) -> float:
    """E[x^2] for a scalar input."""
    if isinstance(dist, StandardNormal):
        return 1.0
    if isinstance(dist, ShiftedPoisson):
        return dist.lam + (dist.lam + 1.0) ** 2
    raise TypeError(f"unknown input distribution {dist!r}")


def second_moment_matrix(dist: InputDist, d: int) -> np.ndarray:
    """E[x x^T] for i.i.d. coordinates."""
    if isinstance(dist, StandardNormal):
        return np.eye(d)
    if isinstance(dist, ShiftedPoisson):
        m = dist.lam + 1.0
        return dist.lam * np.eye(d) + m * m * np.ones((d, d))
    raise TypeError(f"unknown input distribution {dist!r}")


def test_loss(w, spec: RegressionSpec) -> float:
    """Population squared loss ||w - w*||^2_{E[xx^T]} + noise variance."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (spec.d,):
        raise ValueError("dimension mismatch between w and w_star")
    diff = w - np.asarray(spec.w_star)
    M = second_moment_matrix(spec.input_dist, spec.d)
    return float(diff @ M @ diff + spec.noise_var)


test_loss.__test__ = False


def g1_poisson_exact(lam: float, w_star: float, eps: float) -> float:
    """Exact one-sample gap for x ~ Poisson(lam) + 1.

    E[x^2] * sum_{1 <= k < eps} Pr[x = k] (w*^2 - 1/k^2).  Only the |x| < eps
    branch differs between the two estimators.
    """
    if abs(w_star) < 1.0:
        raise HypothesisError("the closed form requires |w_star| >= 1")
    if lam <= 0:
        raise ValueError("Poisson rate must be positive")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    total = 0.0
    k = 1
    while k < eps:
        total += poisson_pmf(lam, k - 1) * (w_star * w_star - 1.0 / (k * k))
        k += 1
    return population_second_moment(ShiftedPoisson(lam)) * total


# -- Monte Carlo -------------------------------------------------------------

def _draw_inputs(dist: InputDist, shape, stream: np.random.Generator) -> np.ndarray:
    if isinstance(dist, StandardNormal):
        return stream.standard_normal(shape)
    return sample_shifted_poisson(dist.lam, shape, stream)


def sample_dataset(spec: RegressionSpec, n: int, stream: np.random.Generator, batch: int | None = None):
    """Draw inputs and responses y = <w*, x> + noise.

    Returns ``(X, y)`` shaped (n, d) and (n,), with a leading ``batch`` axis
    when given.
    """
    lead = () if batch is None else (batch,)
    X = _draw_inputs(spec.input_dist, lead + (n, spec.d), stream)
    noise = math.sqrt(spec.noise_var) * stream.standard_normal(lead + (n,))
    return X, X @ np.asarray(spec.w_star) + noise


@dataclass(frozen=True)
class RegressionTrials:
    w_std: np.ndarray
    w_rob: np.ndarray
    rejections: int


def regression_trials(spec: RegressionSpec, n: int, trials: int, seed: int,
                      workers: int = 1) -> RegressionTrials:
    """Per-trial standard and robust fits for the one-dimensional study."""
    if spec.d != 1:
        raise ValueError("Monte Carlo regression is implemented for d = 1")
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be positive")
    eps = spec.eps

    def block(b: int, size: int):
        stream = substream(seed, REGRESSION_STREAM, n, b)
        X, y = sample_dataset(spec, n, stream, batch=size)
        x = X[..., 0]
        rejected = 0
        dead = np.flatnonzero(np.all(x == 0.0, axis=1))
        for row in dead:
            attempt = 0
            while np.all(x[row] == 0.0):
                attempt += 1
                rejected += 1
                Xr, yr = sample_dataset(spec, n, substream(seed, REGRESSION_STREAM, n, b, row, attempt))
                x[row], y[row] = Xr[:, 0], yr
        w_std = (x * y).sum(axis=1) / (x * x).sum(axis=1)
        w_rob = robust_fit_batch(x, y, eps)
        return w_std, w_rob, rejected

    parts = run_blocks(block, trials, workers)
    return RegressionTrials(
        w_std=np.concatenate([p[0] for p in parts]),
        w_rob=np.concatenate([p[1] for p in parts]),
        rejections=sum(p[2] for p in parts),
    )


def mc_scaled_gap(spec: RegressionSpec, n: int, trials: int, seed: int, workers: int = 1) -> McEstimate:
    """Monte Carlo estimate of g_n / E[x^2] = E[(w_rob - w*)^2 - (w_std - w*)^2]."""
    if trials < 2:
        raise ValueError("trials must be >= 2 to report a standard error")
    res = regression_trials(spec, n, trials, seed, workers)
    w_star = spec.w_star[0]
    values = (res.w_rob - w_star) ** 2 - (res.w_std - w_star) ** 2
    return summarize(values, seed, res.rejections)


def mc_squared_errors(spec: RegressionSpec, n: int, trials: int, seed: int,
                      workers: int = 1) -> tuple[McEstimate, McEstimate]:
    """Empirical E[(w_rob - w*)^2] and E[(w_std - w*)^2] from the same trials."""
    res = regression_trials(spec, n, trials, seed, workers)
    w_star = spec.w_star[0]
    return (summarize((res.w_rob - w_star) ** 2, seed, res.rejections),
            summarize((res.w_std - w_star) ** 2, seed, res.rejections))


def mc_scaled_test_loss(spec: RegressionSpec, n: int, trials: int, seed: int,
                        workers: int = 1) -> tuple[McEstimate, McEstimate]:
    """Scaled test losses L_n / E[x^2] of the (standard, robust) estimators."""
    res = regression_trials(spec, n, trials, seed, workers)
    w_star = spec.w_star[0]
    offset = spec.noise_var / population_second_moment(spec.input_dist)
    return (summarize((res.w_std - w_star) ** 2 + offset, seed, res.rejections),
            summarize((res.w_rob - w_star) ** 2 + offset, seed, res.rejections))
