import os
import subprocess
import sys

import numpy as np
import pytest

from robgap import _pykernels, kernels
from robgap.regression import robust_objective

try:
    from robgap import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def _instances(seed, T=2000, n=7, scale=1.0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((T, n)) * scale, rng.standard_normal((T, n)) * scale


class TestBackend:
    def test_label(self):
        assert kernels.BACKEND in ("compiled", "python")
        if _ckernels is not None and not os.environ.get("ROBGAP_PURE_PYTHON"):
            assert kernels.BACKEND == "compiled"

    def test_forced_python(self):
        env = dict(os.environ, ROBGAP_PURE_PYTHON="1")
        out = subprocess.run([sys.executable, "-c", "import robgap; print(robgap.BACKEND)"],
                             env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"


class TestPythonKernel:
    def test_minimises_objective(self):
        xs, ys = _instances(1, T=300)
        w = _pykernels.robust_fit_batch(xs, ys, 0.8)
        grid = np.linspace(-6, 6, 24001)
        for i in range(0, 300, 30):
            f = robust_objective(xs[i], ys[i], 0.8, w[i])
            assert f <= robust_objective(xs[i], ys[i], 0.8, grid).min() + 1e-9

    def test_single_column(self):
        xs = np.array([[1.0], [1.0], [-2.0], [0.5]])
        ys = np.array([[2.0], [2.0], [4.0], [1.0]])
        eps = np.array([0.5, 1.5, 1.0, 0.5])
        for i, e in enumerate(eps):
            w = _pykernels.robust_fit_batch(xs[i:i + 1], ys[i:i + 1], float(e))[0]
            # last row sits on |x| = eps, where the tie rule picks 0
            assert w == [2.0, 0.0, -2.0, 0.0][i]


@needs_ext
class TestAgreement:
    @pytest.mark.parametrize("eps", [0.05, 0.5, 1.0, 2.9])
    @pytest.mark.parametrize("n", [1, 2, 5, 20])
    def test_random(self, eps, n):
        xs, ys = _instances(n * 100 + int(eps * 10), n=n)
        a = _ckernels.robust_fit_batch(xs, ys, eps)
        b = _pykernels.robust_fit_batch(xs, ys, eps)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_poisson_inputs_with_ties(self):
        # integer inputs produce repeated breakpoints and flat segments
        rng = np.random.default_rng(3)
        xs = (rng.poisson(2.0, (3000, 4)) + 1).astype(float)
        ys = xs + rng.standard_normal((3000, 4))
        for eps in (1.0, 2.0, 3.0, 5.5):
            a = _ckernels.robust_fit_batch(xs, ys, eps)
            b = _pykernels.robust_fit_batch(xs, ys, eps)
            assert np.allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_zero_rows(self):
        xs = np.zeros((3, 4))
        ys = np.ones((3, 4))
        assert np.array_equal(_ckernels.robust_fit_batch(xs, ys, 0.3), np.zeros(3))
        assert np.array_equal(_pykernels.robust_fit_batch(xs, ys, 0.3), np.zeros(3))


class TestDispatcher:
    def test_shape_checks(self):
        with pytest.raises(ValueError):
            kernels.robust_fit_batch(np.ones(3), np.ones(3), 0.1)
        with pytest.raises(ValueError):
            kernels.robust_fit_batch(np.ones((2, 3)), np.ones((2, 4)), 0.1)
        with pytest.raises(ValueError):
            kernels.robust_fit_batch(np.ones((2, 3)), np.ones((2, 3)), -1.0)

    def test_zero_budget_closed_form(self):
        xs, ys = _instances(9, T=50)
        w = kernels.robust_fit_batch(xs, ys, 0.0)
        assert np.array_equal(w, (xs * ys).sum(axis=1) / (xs * xs).sum(axis=1))

    def test_accepts_non_contiguous(self):
        xs, ys = _instances(4, T=40, n=6)
        a = kernels.robust_fit_batch(xs[:, ::2], ys[:, ::2], 0.7)
        b = kernels.robust_fit_batch(xs[:, ::2].copy(), ys[:, ::2].copy(), 0.7)
        assert np.array_equal(a, b)
