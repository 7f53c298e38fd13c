"""Command-line entry point: ``robgap <subcommand> [flags]``.

Exit status: 0 success, 2 usage error, 3 I/O error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .experiments import PRESETS, ExperimentConfig, preset, run

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

log = logging.getLogger("robgap")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _add_common(p: argparse.ArgumentParser, mc: bool = False) -> None:
    p.add_argument("--n-min", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    p.add_argument("--plot", action="store_true", help="also write an SVG next to the CSV")
    p.add_argument("--log-x", action="store_true", help="log-scale n axis in the SVG")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--workers", type=int, default=None, help="threads for Monte Carlo blocks")
    if mc:
        p.add_argument("--mc", action="store_true", help="add Monte Carlo estimates next to the exact curve")


def _add_gaussian(p):
    p.add_argument("--w", type=float, default=None)
    p.add_argument("--mu", type=_floats, default=None)
    p.add_argument("--sigma", type=_floats, default=None)


def _add_bernoulli(p, with_w=True):
    if with_w:
        p.add_argument("--w", type=float, default=None)
    p.add_argument("--theta", type=_floats, default=None)
    p.add_argument("--tau", type=float, action="append", default=None)


def _add_regression(p):
    p.add_argument("--dist", choices=("normal", "poisson"), default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--w-star", type=float, default=None)
    p.add_argument("--noise-var", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robgap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gaussian-gap", help="exact gap curves for the Gaussian model")
    _add_gaussian(p)
    p.add_argument("--eps", type=float, action="append", default=None)
    _add_common(p, mc=True)

    p = sub.add_parser("bernoulli-gap", help="exact gap, strip center and half-width, Bernoulli model")
    _add_bernoulli(p)
    p.add_argument("--eps", type=float, action="append", default=None)
    _add_common(p, mc=True)

    p = sub.add_parser("regression-gap", help="Monte Carlo scaled gap for 1-d regression")
    _add_regression(p)
    p.add_argument("--eps", type=float, action="append", default=None)
    _add_common(p)

    p = sub.add_parser("test-loss", help="test losses of the standard and robust models")
    p.add_argument("--model", choices=("gaussian", "bernoulli", "regression"), default="gaussian")
    _add_gaussian(p)
    _add_bernoulli(p, with_w=False)
    _add_regression(p)
    p.add_argument("--eps", type=float, action="append", default=None)
    _add_common(p)

    p = sub.add_parser("phase", help="regime and critical sample sizes")
    p.add_argument("--model", choices=("gaussian", "bernoulli"), default="gaussian")
    _add_gaussian(p)
    _add_bernoulli(p, with_w=False)
    p.add_argument("--eps", type=float, action="append", default=None)
    p.add_argument("--out", default=None, help="optional CSV path for the report rows")

    p = sub.add_parser("reproduce", help="run a figure preset")
    p.add_argument("preset", choices=sorted(PRESETS))
    p.add_argument("--out", default="-")
    p.add_argument("--plot", action="store_true")
    p.add_argument("--log-x", action="store_true")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--workers", type=int, default=None)
    return parser


_FLAG_FIELDS = {
    "w": "W", "mu": "mu", "sigma": "sigma", "theta": "theta", "tau": "tau_list",
    "eps": "eps_list", "n_min": "n_min", "n_max": "n_max", "trials": "trials",
    "seed": "seed", "dist": "dist", "lam": "lam", "w_star": "w_star",
    "noise_var": "noise_var", "workers": "workers", "plot": "plot", "log_x": "log_x",
    "mc": "mc", "model": "model",
}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.command == "reproduce":
        cfg = preset(args.preset)
    else:
        cfg = ExperimentConfig(family=args.command)
    updates = {}
    for flag, fname in _FLAG_FIELDS.items():
        val = getattr(args, flag, None)
        if val is None or val is False:
            continue
        if fname in ("eps_list", "tau_list"):
            val = tuple(val)
        updates[fname] = val
    out = getattr(args, "out", None)
    updates["output_path"] = out
    return replace(cfg, **updates)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        run(cfg)
    except (ArithmeticError, FloatingPointError) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
