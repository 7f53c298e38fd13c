"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is used.  Setting ``ROBGAP_PURE_PYTHON=1`` forces the numpy
path.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

if os.environ.get("ROBGAP_PURE_PYTHON", "") not in ("", "0"):
    _ext = None
else:
    try:
        from . import _ckernels as _ext
    except ImportError:  # extension not built
        _ext = None

BACKEND = "compiled" if _ext is not None else "python"

_fit_batch = _ext.robust_fit_batch if _ext is not None else _pykernels.robust_fit_batch


def robust_fit_batch(xs, ys, eps: float) -> np.ndarray:
    """Row-wise minimiser of sum_i (|y_i - w x_i| + eps |w|)^2 for (T, n) arrays."""
    xs = np.ascontiguousarray(xs, dtype=float)
    ys = np.ascontiguousarray(ys, dtype=float)
    if xs.ndim != 2 or xs.shape != ys.shape:
        raise ValueError("xs and ys must be 2-d arrays of the same shape")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if eps == 0.0:
        # plain least squares; the same expression as the standard estimator so both agree bit for bit
        sxx = (xs * xs).sum(axis=1)
        sxy = (xs * ys).sum(axis=1)
        safe = np.where(sxx > 0, sxx, 1.0)
        return np.where(sxx > 0, sxy / safe, 0.0)
    return _fit_batch(xs, ys, float(eps))
