"""Experiment sweeps, figure presets and CSV/SVG emission."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import bernoulli, gaussian
from .bernoulli import BernoulliSpec
from .gaussian import GaussianSpec
from .phase import RegimeReport
from .regression import (
    RegressionSpec,
    ShiftedPoisson,
    StandardNormal,
    mc_scaled_gap,
    mc_scaled_test_loss,
)
from .sampler import mc_gap_classification

FAMILIES = ("gaussian-gap", "bernoulli-gap", "regression-gap", "test-loss", "phase")
CSV_HEADER = ("family", "param_label", "n", "value", "stderr")
DIVERGENT = "divergent"


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    model: str = "gaussian"  # test-loss / phase: gaussian | bernoulli | regression
    W: float = 1.0
    mu: tuple[float, ...] = (1.0,)
    sigma: tuple[float, ...] = (2.0,)
    theta: tuple[float, ...] = (1.0,)
    tau_list: tuple[float, ...] = (0.5,)
    eps_list: tuple[float, ...] = (0.5,)
    n_min: int = 1
    n_max: int = 200
    trials: int = 10_000
    seed: int = 0
    dist: str = "normal"
    lam: float = 5.0
    w_star: float = 1.0
    noise_var: float = 1.0
    mc: bool = False
    workers: int = 1
    output_path: str | None = None
    plot: bool = False
    log_x: bool = False

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError("need 1 <= n_min <= n_max")
        if not self.eps_list:
            raise ValueError("eps list must be non-empty")
        if not self.tau_list:
            raise ValueError("tau list must be non-empty")
        if self.trials < 2:
            raise ValueError("trials must be >= 2")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.dist not in ("normal", "poisson"):
            raise ValueError("dist must be 'normal' or 'poisson'")
        if self.model not in ("gaussian", "bernoulli", "regression"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def ns(self) -> range:
        return range(self.n_min, self.n_max + 1)

    def gaussian_spec(self, eps: float) -> GaussianSpec:
        return GaussianSpec(self.W, self.mu, self.sigma, eps)

    def bernoulli_spec(self, tau: float, eps: float) -> BernoulliSpec:
        return BernoulliSpec(self.W, self.theta, tau, eps)

    def regression_spec(self, eps: float) -> RegressionSpec:
        dist = StandardNormal() if self.dist == "normal" else ShiftedPoisson(self.lam)
        return RegressionSpec((self.w_star,), self.noise_var, dist, eps)


@dataclass
class GapCurve:
    """One plotted series; ``points`` holds (n, value, stderr) with n increasing.

    A value of None marks a divergent cell.
    """

    family: str
    label: str
    points: list[tuple[int, float | None, float | None]] = field(default_factory=list)
    meta: ExperimentConfig | None = None

    def values(self) -> np.ndarray:
        return np.array([np.nan if v is None else v for _, v, _ in self.points])


def _fmt(v) -> str:
    if v is None:
        return ""
    return format(float(v), ".17g")


def _g(v: float) -> str:
    return format(v, "g")


# -- family runners ----------------------------------------------------------

def _gaussian_gap(cfg: ExperimentConfig) -> list[GapCurve]:
    ns = np.array(cfg.ns)
    curves = []
    for eps in cfg.eps_list:
        spec = cfg.gaussian_spec(eps)
        vals = np.atleast_1d(gaussian.exact_gap(spec, ns))
        curves.append(GapCurve(cfg.family, f"eps={_g(eps)}",
                               [(int(n), float(v), None) for n, v in zip(ns, vals)], cfg))
        if cfg.mc:
            pts = []
            for n in ns:
                est = mc_gap_classification(spec, int(n), cfg.trials, cfg.seed, cfg.workers)
                pts.append((int(n), est.mean, est.stderr))
            curves.append(GapCurve(cfg.family, f"eps={_g(eps)};mc", pts, cfg))
    return curves


def _bernoulli_gap(cfg: ExperimentConfig) -> list[GapCurve]:
    curves = []
    for tau in cfg.tau_list:
        for eps in cfg.eps_list:
            spec = cfg.bernoulli_spec(tau, eps)
            base = f"tau={_g(tau)};eps={_g(eps)}"
            gap, center, half = [], [], []
            for n in cfg.ns:
                sp = bernoulli.strip_point(spec, n)
                gap.append((n, sp.gap, None))
                center.append((n, sp.center, None))
                half.append((n, sp.halfwidth, None))
            curves += [GapCurve(cfg.family, f"{base};gap", gap, cfg),
                       GapCurve(cfg.family, f"{base};center", center, cfg),
                       GapCurve(cfg.family, f"{base};halfwidth", half, cfg)]
            if cfg.mc:
                pts = []
                for n in cfg.ns:
                    est = mc_gap_classification(spec, n, cfg.trials, cfg.seed, cfg.workers)
                    pts.append((n, est.mean, est.stderr))
                curves.append(GapCurve(cfg.family, f"{base};mc", pts, cfg))
    return curves


def _divergent(spec: RegressionSpec, n: int) -> bool:
    # with one standard-normal input the standard estimator has infinite risk
    return n == 1 and isinstance(spec.input_dist, StandardNormal)


def _regression_gap(cfg: ExperimentConfig) -> list[GapCurve]:
    curves = []
    for eps in cfg.eps_list:
        spec = cfg.regression_spec(eps)
        pts = []
        for n in cfg.ns:
            if _divergent(spec, n):
                pts.append((n, None, None))
                continue
            est = mc_scaled_gap(spec, n, cfg.trials, cfg.seed, cfg.workers)
            pts.append((n, est.mean, est.stderr))
        curves.append(GapCurve(cfg.family, f"{spec.input_dist.label};eps={_g(eps)}", pts, cfg))
    return curves


def _test_loss(cfg: ExperimentConfig) -> list[GapCurve]:
    curves = []
    ns = list(cfg.ns)
    if cfg.model == "gaussian":
        std = cfg.gaussian_spec(0.0)
        vals = np.atleast_1d(gaussian.test_loss_standard(std, np.array(ns)))
        curves.append(GapCurve(cfg.family, "gaussian;standard",
                               [(n, float(v), None) for n, v in zip(ns, vals)], cfg))
        for eps in cfg.eps_list:
            vals = np.atleast_1d(gaussian.test_loss_robust(cfg.gaussian_spec(eps), np.array(ns)))
            curves.append(GapCurve(cfg.family, f"gaussian;robust;eps={_g(eps)}",
                                   [(n, float(v), None) for n, v in zip(ns, vals)], cfg))
    elif cfg.model == "bernoulli":
        for tau in cfg.tau_list:
            std = cfg.bernoulli_spec(tau, 0.0)
            curves.append(GapCurve(cfg.family, f"bernoulli;tau={_g(tau)};standard",
                                   [(n, bernoulli.test_loss_standard(std, n), None) for n in ns], cfg))
            for eps in cfg.eps_list:
                spec = cfg.bernoulli_spec(tau, eps)
                curves.append(GapCurve(cfg.family, f"bernoulli;tau={_g(tau)};robust;eps={_g(eps)}",
                                       [(n, bernoulli.test_loss_robust(spec, n), None) for n in ns], cfg))
    else:
        std_pts = None
        for eps in cfg.eps_list:
            spec = cfg.regression_spec(eps)
            rob_pts, s_pts = [], []
            for n in ns:
                if _divergent(spec, n):
                    # robust loss is finite, the standard one is not
                    _, rob = mc_scaled_test_loss(spec, n, cfg.trials, cfg.seed, cfg.workers)
                    rob_pts.append((n, rob.mean, rob.stderr))
                    s_pts.append((n, None, None))
                    continue
                std, rob = mc_scaled_test_loss(spec, n, cfg.trials, cfg.seed, cfg.workers)
                rob_pts.append((n, rob.mean, rob.stderr))
                s_pts.append((n, std.mean, std.stderr))
            if std_pts is None:
                std_pts = s_pts
                curves.append(GapCurve(cfg.family, f"{spec.input_dist.label};standard", std_pts, cfg))
            curves.append(GapCurve(cfg.family, f"{spec.input_dist.label};robust;eps={_g(eps)}",
                                   rob_pts, cfg))
    return curves


def phase_report(model: str, spec) -> RegimeReport:
    if model == "gaussian":
        return gaussian.regime(spec)
    if model == "bernoulli":
        return bernoulli.regime(spec)
    raise ValueError(f"phase analysis is defined for gaussian or bernoulli, not {model!r}")


def format_report(report: RegimeReport) -> str:
    lines = [f"regime: {report.regime.value}"]
    if report.increasing_until is not None:
        lines.append(f"increasing for n < {report.increasing_until:.10g}")
    if report.decreasing_from is not None:
        lines.append(f"decreasing for n >= {report.decreasing_from:.10g}")
    for j, c in enumerate(report.per_coordinate_critical):
        if math.isnan(c):
            text = "n/a"
        elif math.isinf(c):
            text = "none (always increasing)"
        else:
            text = f"{c:.10g}"
        lines.append(f"critical n, coordinate {j}: {text}")
    return "\n".join(lines)


def _phase(cfg: ExperimentConfig) -> tuple[list[GapCurve], list[str]]:
    curves, texts = [], []
    if cfg.model == "gaussian":
        jobs = [(f"gaussian;eps={_g(e)}", cfg.gaussian_spec(e)) for e in cfg.eps_list]
    elif cfg.model == "bernoulli":
        jobs = [(f"bernoulli;tau={_g(t)};eps={_g(e)}", cfg.bernoulli_spec(t, e))
                for t in cfg.tau_list for e in cfg.eps_list]
    else:
        raise ValueError("phase analysis is defined for gaussian or bernoulli models")
    for label, spec in jobs:
        rep = phase_report(cfg.model, spec)
        texts.append(f"[{label}]\n{format_report(rep)}")
        rows = [(0, float(rep.increasing_until) if rep.increasing_until is not None else None, None)]
        curves.append(GapCurve("phase", f"{label};regime={rep.regime.value};increasing_until", rows, cfg))
        rows = [(0, float(rep.decreasing_from) if rep.decreasing_from is not None else None, None)]
        curves.append(GapCurve("phase", f"{label};regime={rep.regime.value};decreasing_from", rows, cfg))
        for j, c in enumerate(rep.per_coordinate_critical):
            curves.append(GapCurve("phase", f"{label};critical_n;coord={j}",
                                   [(0, None if math.isnan(c) else c, None)], cfg))
    return curves, texts


def run(config: ExperimentConfig) -> list[GapCurve]:
    """Compute every series for ``config`` and write CSV (and SVG) if a path is set."""
    config.validate()
    texts: list[str] = []
    if config.family == "gaussian-gap":
        curves = _gaussian_gap(config)
    elif config.family == "bernoulli-gap":
        curves = _bernoulli_gap(config)
    elif config.family == "regression-gap":
        curves = _regression_gap(config)
    elif config.family == "test-loss":
        curves = _test_loss(config)
    else:
        curves, texts = _phase(config)
    for t in texts:
        print(t)
    if config.output_path is not None:
        write_csv(curves, config.output_path)
        if config.plot and config.family != "phase":
            write_svg(curves, Path(config.output_path).with_suffix(".svg"), log_x=config.log_x)
    return curves


# -- output ------------------------------------------------------------------

def _cell(curve: GapCurve, value) -> str:
    if value is None:
        return DIVERGENT if curve.family in ("regression-gap", "test-loss") else ""
    return _fmt(value)


def render_csv(curves: list[GapCurve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in curves:
        for n, v, se in c.points:
            w.writerow([c.family, c.label, "" if c.family == "phase" else n, _cell(c, v), _fmt(se)])
    return buf.getvalue()


def write_csv(curves: list[GapCurve], path) -> None:
    text = render_csv(curves)
    if str(path) == "-":
        print(text, end="")
        return
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_svg(curves: list[GapCurve], path, log_x: bool = False) -> None:
    """Static line plot of every curve; needs matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "robgap"
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for c in curves:
        n = [p[0] for p in c.points]
        ax.plot(n, c.values(), label=c.label, linewidth=1.2)
    if log_x:
        ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# -- presets -----------------------------------------------------------------

PRESETS: dict[str, ExperimentConfig] = {
    "fig1a": ExperimentConfig(
        family="gaussian-gap", W=1.0, mu=(1.0,), sigma=(2.0,),
        eps_list=(0.2, 0.5, 0.7, 0.9, 0.95, 1.0), n_min=1, n_max=200),
    "fig1b": ExperimentConfig(
        family="bernoulli-gap", W=1.0, theta=(1.0,), eps_list=(0.2,),
        tau_list=(0.1, 0.2, 0.5, 0.7), n_min=1, n_max=200),
    "fig2-normal": ExperimentConfig(
        family="regression-gap", dist="normal", w_star=1.0, noise_var=1.0,
        eps_list=(0.05, 0.75, 1.0), n_min=1, n_max=20, trials=20_000),
    "fig2-poisson": ExperimentConfig(
        family="regression-gap", dist="poisson", lam=5.0, w_star=1.0, noise_var=1.0,
        eps_list=tuple(float(e) for e in range(1, 16)), n_min=1, n_max=20, trials=20_000),
    "fig5a": ExperimentConfig(
        family="test-loss", model="gaussian", W=1.0, mu=(1.0,), sigma=(2.0,),
        eps_list=(0.2, 0.5, 0.7, 0.9, 0.95, 1.0), n_min=1, n_max=200),
    "fig5b": ExperimentConfig(
        family="test-loss", model="bernoulli", W=1.0, theta=(1.0,), eps_list=(0.2,),
        tau_list=(0.1, 0.2, 0.5, 0.7), n_min=1, n_max=200),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    return replace(PRESETS[name], **overrides)
