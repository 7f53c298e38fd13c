"""Data generators, closed-form classifiers and the Monte Carlo engine.

Random streams are counter-based (Philox) and keyed by integers, so a stream
for (seed, family, n, block) is the same no matter which worker draws it.
Trials are grouped in fixed blocks of ``BLOCK_TRIALS``; a block is the unit
of parallel work, and per-trial values are concatenated in block order before
reduction.  Results therefore do not depend on the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bernoulli import BernoulliSpec
from .gaussian import GaussianSpec

BLOCK_TRIALS = 8192

# stream family tags
GAUSSIAN_STREAM = 1
BERNOULLI_STREAM = 2
REGRESSION_STREAM = 3


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int
    rejections: int = 0

    def contains(self, value: float, k: float = 4.0) -> bool:
        """True when ``value`` lies within mean +- k stderr."""
        return abs(value - self.mean) <= k * self.stderr


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the integer key (seed, *key)."""
    if seed < 0 or seed >= 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence([int(seed), *[int(k) for k in key]])
    return np.random.Generator(np.random.Philox(ss))


def summarize(values: np.ndarray, seed: int, rejections: int = 0) -> McEstimate:
    values = np.asarray(values, dtype=float)
    t = values.size
    if t < 2:
        raise ValueError("at least two trials are needed for a standard error")
    return McEstimate(
        mean=float(values.mean()),
        stderr=float(values.std(ddof=1) / math.sqrt(t)),
        trials=t,
        seed=int(seed),
        rejections=rejections,
    )


def run_blocks(fn: Callable[[int, int], np.ndarray], trials: int, workers: int = 1):
    """Evaluate ``fn(block_index, block_size)`` over all blocks and concatenate in order."""
    if trials < 1:
        raise ValueError("trials must be positive")
    sizes = [BLOCK_TRIALS] * (trials // BLOCK_TRIALS)
    if trials % BLOCK_TRIALS:
        sizes.append(trials % BLOCK_TRIALS)
    jobs = list(enumerate(sizes))
    if workers <= 1 or len(jobs) == 1:
        parts = [fn(b, s) for b, s in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return parts


# -- generators --------------------------------------------------------------

def _labels(stream: np.random.Generator, shape) -> np.ndarray:
    return np.where(stream.random(shape) < 0.5, -1.0, 1.0)


def sample_gaussian(spec: GaussianSpec, n: int, stream: np.random.Generator, batch: int | None = None):
    """Draw n labelled points: y uniform on {-1, 1}, x = y mu + sigma z.

    Returns ``(X, y)`` with shapes (n, d) and (n,), or with a leading
    ``batch`` axis when given.
    """
    lead = () if batch is None else (batch,)
    y = _labels(stream, lead + (n,))
    z = stream.standard_normal(lead + (n, spec.d))
    X = y[..., None] * np.asarray(spec.mu) + np.asarray(spec.sigma) * z
    return X, y


def sample_bernoulli(spec: BernoulliSpec, n: int, stream: np.random.Generator, batch: int | None = None):
    """Draw n labelled points: x(j) = +y theta(j) w.p. (1 + tau)/2, else -y theta(j)."""
    lead = () if batch is None else (batch,)
    y = _labels(stream, lead + (n,))
    agree = stream.random(lead + (n, spec.d)) < spec.p
    X = np.where(agree, 1.0, -1.0) * y[..., None] * np.asarray(spec.theta)
    return X, y


def sample_shifted_poisson(lam: float, size, stream: np.random.Generator) -> np.ndarray:
    """Poisson(lam) + 1 by inversion (sequential search over the CDF table)."""
    if lam <= 0:
        raise ValueError("Poisson rate must be positive")
    if lam > 30:
        return stream.poisson(lam, size).astype(float) + 1.0
    pmf = [math.exp(-lam)]
    cdf = [pmf[0]]
    k = 0
    while 1.0 - cdf[-1] > 1e-17 and k < 1000:
        k += 1
        pmf.append(pmf[-1] * lam / k)
        cdf.append(cdf[-1] + pmf[-1])
    u = stream.random(size)
    # smallest k with u <= F(k)
    draws = np.searchsorted(np.asarray(cdf), u, side="left")
    return draws.astype(float) + 1.0


# -- classifiers -------------------------------------------------------------

def standard_classifier(u, W: float) -> np.ndarray:
    """W sign(u), with sign(0) = 0."""
    return W * np.sign(np.asarray(u, dtype=float))


def robust_classifier(u, W: float, eps: float) -> np.ndarray:
    """W sign(u - eps sign(u))."""
    u = np.asarray(u, dtype=float)
    return W * np.sign(u - eps * np.sign(u))


def classification_gap_value(u, mean_vec, W: float, eps: float) -> np.ndarray:
    """<w_std - w_rob, mean_vec> for u of shape (..., d)."""
    diff = standard_classifier(u, W) - robust_classifier(u, W, eps)
    return diff @ np.asarray(mean_vec, dtype=float)


# -- Monte Carlo engine ------------------------------------------------------

def _gaussian_block(spec: GaussianSpec, n: int, seed: int):
    def block(b: int, size: int) -> np.ndarray:
        X, y = sample_gaussian(spec, n, substream(seed, GAUSSIAN_STREAM, n, b), batch=size)
        u = (y[..., None] * X).mean(axis=1)
        return classification_gap_value(u, spec.mu, spec.W, spec.eps)
    return block


def _bernoulli_block(spec: BernoulliSpec, n: int, seed: int):
    theta = np.asarray(spec.theta)

    def block(b: int, size: int) -> np.ndarray:
        X, y = sample_bernoulli(spec, n, substream(seed, BERNOULLI_STREAM, n, b), batch=size)
        # u = mean(y x) = theta (2S - n) / n exactly, written as in the exact sums
        S = (y[..., None] * X > 0).sum(axis=1)
        u = theta * (2.0 * S - n) / n
        return classification_gap_value(u, theta * spec.tau, spec.W, spec.eps)
    return block


def mc_gap_classification(model, n: int, trials: int, seed: int, workers: int = 1) -> McEstimate:
    """Monte Carlo estimate of the robust-minus-standard test loss gap.

    The inner expectation over test data is taken analytically: the gap for a
    fixed training set is <w_std - w_rob, E[y x]>.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if trials < 2:
        raise ValueError("trials must be >= 2 to report a standard error")
    if isinstance(model, GaussianSpec):
        fn = _gaussian_block(model, n, seed)
    elif isinstance(model, BernoulliSpec):
        fn = _bernoulli_block(model, n, seed)
    else:
        raise TypeError(f"unsupported model {type(model).__name__}")
    values = np.concatenate(run_blocks(fn, trials, workers))
    return summarize(values, seed)
