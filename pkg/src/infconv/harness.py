"""Experiment orchestration: ladders, rate fits, and audits.

Four experiment kinds are exposed, each consuming an
:class:`ExperimentConfig` and emitting one CSV row per ladder point
plus a flat summary record:

* ``quadratic`` -- deficit / eps^2 plateau against the family's
  closed-form constant,
* ``sharpness`` -- per ladder point the deficit and the L1 model
  distance; fits the log-log slope (the stability exponent, expected
  1/2) and tracks distance / rate toward the first-variation constant,
* ``limit``     -- short-time hypercontractivity-to-log-Sobolev ladder
  against the direct log-Sobolev deficit,
* ``equality``  -- extremizer members must have vanishing deficit and
  model distance; perturbed members must not.

Ladder points run in a thread pool capped by INFCONV_THREADS and are
merged by index, so identical configs produce identical CSVs.
"""

import configparser
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import deficits, extremizer, families, funcrep, pl
from .deficits import HCParams

__all__ = [
    "LadderSpec",
    "ExperimentConfig",
    "RateFit",
    "run_quadratic_rate",
    "run_sharpness",
    "run_limit_check",
    "run_equality_audit",
    "run_experiment",
]


def _pool_size() -> int:
    env = os.environ.get("INFCONV_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _map_indexed(fn, items):
    """Applies fn over items in a work pool, merged back by index."""
    if len(items) <= 1 or _pool_size() == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=_pool_size()) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class LadderSpec:
    """Geometric ladder: start, ratio in (0,1), count >= 6."""

    start: float
    ratio: float = 0.5
    count: int = 9

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0 and self.start > 0.0):
            raise ValueError("ladder needs start > 0 and ratio in (0, 1)")
        if self.count < 6:
            raise ValueError("ladder needs at least 6 points")

    def values(self):
        return [self.start * self.ratio ** k for k in range(self.count)]


@dataclass
class ExperimentConfig:
    kind: str
    family: str = "power_hc"
    n_list: tuple = (1,)
    p_list: tuple = (2.0,)
    alpha: float = 1.0
    beta: Optional[float] = None
    t: float = 1.0
    eps: float = 0.1
    ladder: LadderSpec = field(default_factory=lambda: LadderSpec(2.0 ** -4, 0.5, 9))
    nodes: int = 2048
    rmax: float = 30.0
    seed: int = 0
    csv_path: Optional[str] = None
    figure_path: Optional[str] = None
    drop_largest: int = 2
    noise_floor: float = 1e-12
    strict: bool = False

    @classmethod
    def from_file(cls, path, kind=None, strict=False):
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        with open(path) as fh:
            parser.read_file(fh)
        exp = parser["experiment"] if parser.has_section("experiment") else {}
        lad = parser["ladder"] if parser.has_section("ladder") else {}
        grid = parser["grid"] if parser.has_section("grid") else {}
        out = parser["output"] if parser.has_section("output") else {}
        fit = parser["fit"] if parser.has_section("fit") else {}

        def floats(text):
            return tuple(float(tok) for tok in str(text).split(","))

        ladder = LadderSpec(
            start=float(lad.get("start", 2.0 ** -4)),
            ratio=float(lad.get("ratio", 0.5)),
            count=int(lad.get("count", 9)),
        )
        return cls(
            kind=kind or exp.get("kind", "quadratic"),
            family=exp.get("family", "power_hc").replace("-", "_"),
            n_list=tuple(int(v) for v in floats(exp.get("n", "1"))),
            p_list=floats(exp.get("p", "2.0")),
            alpha=float(exp.get("alpha", 1.0)),
            beta=float(exp["beta"]) if "beta" in exp else None,
            t=float(exp.get("t", 1.0)),
            eps=float(exp.get("eps", 0.1)),
            ladder=ladder,
            nodes=int(grid.get("nodes", 2048)),
            rmax=float(grid.get("rmax", 30.0)),
            seed=int(exp.get("seed", 0)),
            csv_path=out.get("csv"),
            figure_path=out.get("figure"),
            drop_largest=int(fit.get("drop_largest", 2)),
            noise_floor=float(fit.get("noise_floor", 1e-12)),
            strict=strict,
        )


@dataclass
class RateFit:
    """Ladder points with the fitted slope and plateau constant."""

    points: list
    slope: float
    quad_constant: float
    r_squared: float
    window: tuple

    def summary(self) -> dict:
        return {"slope": self.slope, "quad_constant": self.quad_constant,
                "r_squared": self.r_squared,
                "window_lo": self.window[0], "window_hi": self.window[1]}


def _fit_window(eps_vals, deficits_vals, drop_largest, noise_floor):
    """Indices kept for the asymptotic fit: drop the largest-eps points
    and anything within 100x of the quadrature noise."""
    keep = []
    order = np.argsort(eps_vals)[::-1]  # largest first
    dropped = set(order[:drop_largest].tolist())
    for i, d in enumerate(deficits_vals):
        if i in dropped:
            continue
        if not np.isfinite(d) or d <= 100.0 * noise_floor:
            continue
        keep.append(i)
    if len(keep) < 4:
        raise RuntimeError(
            f"fit window has {len(keep)} points; need at least 4")
    return keep


def _loglog_fit(xs, ys):
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(slope), float(intercept), r2


def _family_for(config, n, p, eps):
    kind = config.family
    if kind == "power_hc":
        return families.Family(kind, n, {"p": p, "eps": eps})
    if kind == "stretch_lsi":
        return families.Family(kind, n, {"p": p, "eps": eps})
    if kind == "gauss_quadratic":
        return families.Family(kind, n, {"eps": eps})
    raise ValueError(f"experiment does not support family {kind!r}")


def _deficit_for(config, fam, prof, n, p):
    if config.family == "power_hc":
        params = HCParams(p=p, t=1.0, alpha=1.0, beta=p)
        return deficits.hc_deficit(prof, params).deficit
    if config.family == "stretch_lsi":
        return deficits.lsi_deficit(prof, p).deficit
    if config.family == "gauss_quadratic":
        return deficits.ghc_deficit(prof, 1.0, 1.0).deficit
    raise ValueError(f"experiment does not support family {config.family!r}")


def _quad_target(config, n, p):
    if config.family == "power_hc":
        return (0.5 * n * p ** ((p + 1.0) / (p - 1.0))
                * (p - 1.0) ** ((p - 3.0) / (p - 1.0)))
    if config.family == "stretch_lsi":
        return families.stretch_quadratic_constant(n, p)
    if config.family == "gauss_quadratic":
        return float(n)
    raise ValueError(f"unsupported family {config.family!r}")


def run_quadratic_rate(config: ExperimentConfig):
    """deficit(eps) / eps^2 against the family's closed-form constant."""
    rows = []
    fits = {}
    for n in config.n_list:
        for p in config.p_list:
            target = _quad_target(config, n, p)
            eps_vals = config.ladder.values()

            def point(eps, n=n, p=p, target=target):
                fam = _family_for(config, n, p, eps)
                prof = families.sample(fam, rmax=config.rmax, num=config.nodes)
                d = _deficit_for(config, fam, prof, n, p)
                ratio = d / eps ** 2
                return {"n": n, "p": p, "eps": eps, "deficit": d,
                        "ratio": ratio, "target": target,
                        "rel_err": abs(ratio - target) / abs(target)}

            pts = _map_indexed(point, eps_vals)
            rows.extend(pts)
            keep = _fit_window(eps_vals, [pt["deficit"] for pt in pts],
                               config.drop_largest, config.noise_floor)
            slope, _, r2 = _loglog_fit([eps_vals[i] for i in keep],
                                       [pts[i]["deficit"] for i in keep])
            plateau = pts[keep[-1]]["ratio"]
            fits[(n, p)] = RateFit(points=pts, slope=slope, quad_constant=plateau,
                                   r_squared=r2, window=(keep[0], keep[-1]))
    return rows, fits


def _sharpness_point(config, n, p, eps):
    fam = _family_for(config, n, p, eps)
    prof = families.sample(fam, rmax=config.rmax, num=config.nodes)
    if config.family == "power_hc":
        params = HCParams(p=p, t=1.0, alpha=1.0, beta=p)
        d = deficits.hc_deficit(prof, params).deficit
        pars = extremizer.hc_params(prof, params)
        dist = extremizer.l1_model_distance(prof, pars)
        rate = families.power_rate_parameter(fam)
    elif config.family == "stretch_lsi":
        d = deficits.lsi_deficit(prof, p).deficit
        pars = extremizer.lsi_params(prof, p)
        dist = _stretch_modified_distance(prof, pars, n, p, eps, config)
        rate = eps
    elif config.family == "gauss_quadratic":
        d = deficits.ghc_deficit(prof, 1.0, 1.0).deficit
        pars = extremizer.ghc_params(prof, 1.0, 1.0)
        dist = extremizer.l1_model_distance(prof, pars)
        rate = eps
    else:
        raise ValueError(f"unsupported family {config.family!r}")
    return {"n": n, "p": p, "eps": eps, "rate_param": rate,
            "deficit": d, "distance": dist, "ratio": dist / rate}


def _stretch_modified_distance(prof, pars, n, p, eps, config):
    """Unnormalized variant of the log-Sobolev model distance:

        int |(C1/p)^(-n/p') e^(-(p/C1) |x|^p') - e^(-|x|^(p'-eps))| dx,

    whose first variation in eps is the digamma-integrand constant."""
    pc = p / (p - 1.0)
    amp = -(n / pc) * math.log(pars.c1 / p)
    model = lambda r: amp - (p / pars.c1) * np.power(r, pc)
    target = lambda r: -np.power(r, pc - eps)
    return funcrep.integrate_abs_difference(
        n, model, target, prof.r, tail=funcrep.TailDecay(0.0, 1.0, pc - eps),
        extend=True)


def _sharpness_target(config, n, p):
    if config.family == "power_hc":
        return families.power_variation_constant(n, p)
    if config.family == "stretch_lsi":
        return families.stretch_variation_constant(n, p)
    if config.family == "gauss_quadratic":
        return families.gaussian_variation_constant(n)
    raise ValueError(f"unsupported family {config.family!r}")


def run_sharpness(config: ExperimentConfig):
    """Slope of log(distance) versus log(deficit) plus the limit constant."""
    rows = []
    fits = {}
    for n in config.n_list:
        for p in config.p_list:
            target = _sharpness_target(config, n, p)
            eps_vals = config.ladder.values()
            pts = _map_indexed(lambda e, n=n, p=p: _sharpness_point(config, n, p, e),
                               eps_vals)
            for pt in pts:
                pt["target"] = target
                pt["rel_err"] = abs(pt["ratio"] - target) / abs(target)
            rows.extend(pts)
            keep = _fit_window(eps_vals, [pt["deficit"] for pt in pts],
                               config.drop_largest, config.noise_floor)
            slope, _, r2 = _loglog_fit([pts[i]["deficit"] for i in keep],
                                       [pts[i]["distance"] for i in keep])
            fits[(n, p)] = RateFit(points=pts, slope=slope,
                                   quad_constant=pts[keep[-1]]["ratio"],
                                   r_squared=r2, window=(keep[0], keep[-1]))
    return rows, fits


def run_limit_check(config: ExperimentConfig):
    """Hypercontractivity-deficit ladder against the log-Sobolev target."""
    rows = []
    summaries = {}
    for n in config.n_list:
        for p in config.p_list:
            if config.family == "gauss_quadratic":
                fam = families.Family("gauss_quadratic", n, {"eps": config.eps})
                prof = families.sample(fam, rmax=config.rmax, num=config.nodes)
                check = deficits.ghc_glsi_limit(prof, config.ladder.values())
                y = 1.0
            else:
                fam = families.Family("stretch_lsi", n, {"p": p, "eps": config.eps})
                prof = families.sample(fam, rmax=config.rmax, num=config.nodes)
                g = prof.scaled(p)
                check = deficits.hc_lsi_limit(g, p, config.ladder.values())
                y = deficits.y_value(g, p)
            for t, ratio in check.points:
                # tau-normalized variant: delta/tau = (delta/t) (y t + 1) / y
                rows.append({"n": n, "p": p, "t": t, "ratio": ratio,
                             "ratio_tau": ratio * (y * t + 1.0) / y,
                             "target": check.target})
            summaries[(n, p)] = {"empirical": check.empirical,
                                 "target": check.target,
                                 "rel_err": check.relative_error, "y": y}
    return rows, summaries


def _equality_cases(config):
    cases = []
    for n in config.n_list:
        for p in config.p_list:
            cases.append(("extremizer_hc", dict(n=n, p=p, alpha=1.0, beta=2.0 * p,
                                                t=0.8, C=0.3)))
            cases.append(("extremizer_hc", dict(n=n, p=p, alpha=1.0, beta=1.5,
                                                t=1.2, C=-0.2)))
    cases.append(("extremizer_hc_planted", dict(n=1, p=2.0, alpha=1.0, beta=2.0,
                                                t=1.0, C=0.0, x0=0.5)))
    cases.append(("gauss_linear", dict(n=1, x0=0.8, C0=0.3)))
    cases.append(("gauss_linear", dict(n=1, x0=0.0, C0=-0.5)))
    cases.append(("gauss_linear", dict(n=2, x0=0.0, C0=0.2)))
    for n in config.n_list:
        cases.append(("power_hc_perturbed", dict(n=n, p=config.p_list[0], eps=0.05)))
    return cases


def run_equality_audit(config: ExperimentConfig):
    """Extremizers have zero deficit and distance; perturbations do not."""
    rows = []

    def run_case(item):
        kind, kw = item
        n = kw["n"]
        if kind == "extremizer_hc":
            fam = families.Family("extremizer_hc", n, {k: v for k, v in kw.items()
                                                       if k != "n"})
            prof = families.sample(fam, rmax=config.rmax, num=config.nodes)
            params = HCParams(p=kw["p"], t=kw["t"], alpha=kw["alpha"], beta=kw["beta"])
            d = deficits.hc_deficit(prof, params).deficit
            pars = extremizer.hc_params(prof, params)
            fit = extremizer.fit_translation(prof, pars)
            ok = d < 1e-9 and fit.distance < 1e-5
            return dict(case=kind, n=n, p=kw["p"], deficit=d,
                        distance=fit.distance, x0_err=0.0, passed=ok)
        if kind == "extremizer_hc_planted":
            fam = families.Family("extremizer_hc", n, {k: v for k, v in kw.items()
                                                       if k != "n"})
            span, num = 15.0, 1201  # spacing 0.025 makes x0 = 0.5 commensurate
            prof = families.sample(fam, span=span, num=num)
            params = HCParams(p=kw["p"], t=kw["t"], alpha=kw["alpha"], beta=kw["beta"])
            d = deficits.hc_deficit(prof, params).deficit
            pars = extremizer.hc_params(prof, params)
            fit = extremizer.fit_translation(prof, pars)
            x0_err = abs(float(fit.x0[0]) - kw["x0"])
            h = 2.0 * span / (num - 1)
            ok = d < 1e-9 and fit.distance < 1e-5 and x0_err <= h / 64.0
            return dict(case=kind, n=n, p=kw["p"], deficit=d,
                        distance=fit.distance, x0_err=x0_err, passed=ok)
        if kind == "gauss_linear":
            fam = families.Family("gauss_linear", n, {k: v for k, v in kw.items()
                                                      if k != "n"})
            prof = families.sample(fam, rmax=config.rmax, num=config.nodes,
                                   span=config.rmax)
            d = deficits.ghc_deficit(prof, 1.0, 1.0).deficit
            d_glsi = deficits.glsi_deficit(prof.scaled(0.5)).deficit
            ok = d < 1e-9 and d_glsi < 1e-9
            return dict(case=kind, n=n, p=2.0, deficit=d, distance=d_glsi,
                        x0_err=0.0, passed=ok)
        if kind == "power_hc_perturbed":
            fam = families.Family("power_hc", n, {"p": kw["p"], "eps": kw["eps"]})
            prof = families.sample(fam, rmax=config.rmax, num=config.nodes)
            params = HCParams(p=kw["p"], t=1.0, alpha=1.0, beta=kw["p"])
            d = deficits.hc_deficit(prof, params).deficit
            pars = extremizer.hc_params(prof, params)
            dist = extremizer.l1_model_distance(prof, pars)
            ok = d > 1e-4 and dist > 1e-3
            return dict(case=kind, n=n, p=kw["p"], deficit=d, distance=dist,
                        x0_err=0.0, passed=ok)
        raise ValueError(kind)

    rows = _map_indexed(run_case, _equality_cases(config))
    all_ok = all(r["passed"] for r in rows)
    return rows, {"all_passed": all_ok}


def run_experiment(config: ExperimentConfig):
    """Dispatches, writes CSV (and a figure alongside), returns a summary.

    The returned dict carries ``ok`` reflecting strict-mode health:
    every rate fit needs r^2 >= 0.999 and every audit case must pass.
    """
    from . import report

    if config.kind == "quadratic":
        rows, fits = run_quadratic_rate(config)
        ok = all(f.r_squared >= 0.999 for f in fits.values())
        summary = {f"fit_{n}_{p:g}_{k}": v for (n, p), f in sorted(fits.items())
                   for k, v in f.summary().items()}
    elif config.kind == "sharpness":
        rows, fits = run_sharpness(config)
        ok = all(f.r_squared >= 0.999 for f in fits.values())
        summary = {f"fit_{n}_{p:g}_{k}": v for (n, p), f in sorted(fits.items())
                   for k, v in f.summary().items()}
    elif config.kind == "limit":
        rows, summaries = run_limit_check(config)
        ok = all(s["rel_err"] <= 0.01 for s in summaries.values())
        summary = {f"limit_{n}_{p:g}_{k}": v for (n, p), s in sorted(summaries.items())
                   for k, v in s.items()}
    elif config.kind == "equality":
        rows, info = run_equality_audit(config)
        ok = info["all_passed"]
        summary = {"all_passed": float(ok)}
    else:
        raise ValueError(f"unknown experiment kind {config.kind!r}")

    summary["ok"] = float(ok)
    if config.csv_path:
        report.write_csv(config.csv_path, rows)
        figure = config.figure_path or os.path.splitext(config.csv_path)[0] + ".png"
        report.render_figure(config.kind, rows, figure)
        summary["csv"] = config.csv_path
        summary["figure"] = figure
    return rows, summary, ok
