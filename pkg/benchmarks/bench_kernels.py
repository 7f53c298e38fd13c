"""Time the compiled and numpy robust-regression kernels on the same batches.

    python3 benchmarks/bench_kernels.py --trials 100000 --n 1 5 20
"""
import argparse
import time

import numpy as np

from robgap import _pykernels

try:
    from robgap import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 5, 20])
    ap.add_argument("--eps", type=float, default=3.0)
    ap.add_argument("--lam", type=float, default=5.0, help="Poisson rate of the inputs")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>4} {'python s':>10} {'compiled s':>11} {'speedup':>8} {'max |diff|':>11}")
    for n in args.n:
        xs = rng.poisson(args.lam, (args.trials, n)) + 1.0
        ys = xs + rng.standard_normal((args.trials, n))
        t_py, w_py = best_of(lambda: _pykernels.robust_fit_batch(xs, ys, args.eps), args.repeat)
        if _ckernels is None:
            print(f"{n:>4} {t_py:>10.4f} {'n/a':>11} {'n/a':>8} {'n/a':>11}")
            continue
        t_c, w_c = best_of(lambda: _ckernels.robust_fit_batch(xs, ys, args.eps), args.repeat)
        diff = float(np.max(np.abs(w_py - w_c)))
        print(f"{n:>4} {t_py:>10.4f} {t_c:>11.4f} {t_py / t_c:>7.1f}x {diff:>11.2e}")


if __name__ == "__main__":
    main()
