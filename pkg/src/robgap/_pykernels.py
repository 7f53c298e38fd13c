"""Numpy implementation of the batch kernels; used when the extension is not built."""
from __future__ import annotations

import numpy as np

TIE_RTOL = 1e-12


def _objective(xs, ys, eps, w):
    # xs, ys: (T, n); w: (T, c) -> (T, c)
    r = np.abs(ys[:, None, :] - w[:, :, None] * xs[:, None, :]) + eps * np.abs(w)[:, :, None]
    return np.einsum("tci,tci->tc", r, r)


def robust_fit_batch(xs, ys, eps: float) -> np.ndarray:
    """Row-wise robust 1-d fit for arrays of shape (trials, n)."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 2:
        raise ValueError("xs and ys must be 2-d arrays of the same shape")
    T, n = xs.shape
    if T == 0:
        return np.empty(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(xs != 0.0, ys / np.where(xs != 0.0, xs, 1.0), 0.0)
    # rows with x_i == 0 contribute a duplicate breakpoint at 0, which is harmless
    bp = np.sort(np.concatenate([np.zeros((T, 1)), ratio], axis=1), axis=1)
    m = n + 1
    lo = np.concatenate([np.full((T, 1), -np.inf), bp], axis=1)
    hi = np.concatenate([bp, np.full((T, 1), np.inf)], axis=1)
    probe = 0.5 * (lo + hi)
    probe[:, 0] = hi[:, 0] - 1.0
    probe[:, m] = lo[:, m] + 1.0
    valid = (lo < probe) & (probe < hi)

    t = np.sign(probe)
    s = np.sign(ys[:, None, :] - probe[:, :, None] * xs[:, None, :])
    coef = eps * t[:, :, None] - s * xs[:, None, :]
    A = np.einsum("tsi,tsi->ts", coef, coef)
    B = np.einsum("tsi,tsi->ts", s * ys[:, None, :], coef)
    valid &= A > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.clip(-B / np.where(A > 0.0, A, 1.0), lo, hi)
    cand = np.concatenate([bp, np.where(valid, v, np.nan)], axis=1)
    f = _objective(xs, ys, eps, np.nan_to_num(cand))
    f[np.isnan(cand)] = np.inf
    fmin = f.min(axis=1, keepdims=True)
    ok = f <= fmin + TIE_RTOL * fmin
    # lexicographic (|w|, w) choice among the near-minimal candidates
    mag = np.where(ok, np.abs(cand), np.inf)
    best_mag = mag.min(axis=1, keepdims=True)
    pick = np.where(ok & (mag == best_mag), cand, np.inf)
    return pick.min(axis=1)
