"""Extremizer families, matching parameters, and L1 model distances.

The stability estimates control the L1 distance between a normalized
input and the member of the extremizer family whose parameters are
derived from the input itself:

* hypercontractivity side: model e^(-theta |x - x0|^p' / p') against
  a^(-alpha/beta) e^(alpha g), with theta from the norm exponents and a
  the mass ratio of e^(beta Q_t g) to the closed-form model mass;
* log-Sobolev side: model C2 e^(-(p/C1) |x - x0|^p') against
  f^p / ||f||_p^p, with C1 from the p-norm and Dirichlet integral;
* Gaussian side: model k e^(<x, x0>) against a^(-alpha/(alpha+t))
  e^(alpha g), in Gaussian measure, k = e^(-|x0|^2 / 2).

The translation x0 is found by a derivative-free search (coarse scan at
grid spacing, then pattern refinement to spacing/64); radial inputs pin
x0 = 0.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import funcrep
from .funcrep import (GAUSSIAN, LEBESGUE, GridFunction, LOG_TWO_PI,
                      RadialProfile, integrate_abs_difference)
from .deficits import HCParams
from .hopflax import HopfLaxParams, inf_convolve_fast
from .specfun import log_gamma, log_power_exponential_integral, unit_ball_volume

__all__ = [
    "ExtremizerParams",
    "FitResult",
    "hc_params",
    "lsi_params",
    "ghc_params",
    "l1_model_distance",
    "fit_translation",
]


@dataclass
class ExtremizerParams:
    """Fitted/derived extremizer data for one of the three deficit kinds."""

    kind: str  # "hc" | "lsi" | "ghc"
    n: int
    p: float = math.nan
    theta: float = math.nan       # hc
    a: float = math.nan           # hc / ghc mass ratio
    log_a: float = math.nan
    c1: float = math.nan          # lsi
    c2: float = math.nan          # lsi
    k: float = math.nan           # ghc, e^(-|x0|^2/2)
    x0: Optional[np.ndarray] = None
    alpha: float = math.nan
    beta: float = math.nan
    t: float = math.nan
    log_norm_pp: float = math.nan  # lsi: log ||f||_p^p

    def to_record(self) -> str:
        lines = [f"kind = {self.kind}", f"n = {self.n}"]
        for key in ("p", "theta", "a", "c1", "c2", "k", "alpha", "beta", "t"):
            val = getattr(self, key)
            if not math.isnan(val):
                lines.append(f"{key} = {val:.17g}")
        if self.x0 is not None:
            lines.append("x0 = " + " ".join(f"{v:.17g}" for v in np.atleast_1d(self.x0)))
        return "\n".join(lines)


def hc_params(g, params: HCParams, order: int = 12) -> ExtremizerParams:
    """theta = alpha ((beta-alpha)/(beta t))^(p'-1); a is the ratio of the
    evolved mass to the model mass int e^(-theta (beta/alpha)^p' |x|^p'/p')."""
    n = g.n if isinstance(g, RadialProfile) else g.dim
    pc = params.p_conj
    theta = params.alpha * ((params.beta - params.alpha)
                            / (params.beta * params.t)) ** (pc - 1.0)
    image = inf_convolve_fast(g, params.hopf_lax())
    log_num = funcrep.log_density_integral(image, LEBESGUE, params.beta, order)
    theta0 = theta * (params.beta / params.alpha) ** pc
    log_den = log_power_exponential_integral(n, pc, theta0 / pc)
    log_a = log_num - log_den
    return ExtremizerParams(kind="hc", n=n, p=params.p, theta=theta,
                            a=math.exp(log_a), log_a=log_a,
                            alpha=params.alpha, beta=params.beta, t=params.t)


def lsi_params(f, p: float, order: int = 12) -> ExtremizerParams:
    """C1 = p' (n/p)^(p'-1) ||f||_p^p' (int |grad f|^p)^(1-p'); C2 closes the mass."""
    n = f.n if isinstance(f, RadialProfile) else f.dim
    pc = p / (p - 1.0)
    log_norm_pp = funcrep.log_density_integral(f, LEBESGUE, p, order)
    dirichlet = funcrep.grad_norm_p(f, p, LEBESGUE, order)
    if dirichlet <= 0.0:
        raise ValueError("degenerate input: zero Dirichlet energy")
    log_c1 = (math.log(pc) + (pc - 1.0) * math.log(n / p)
              + (pc / p) * log_norm_pp + (1.0 - pc) * math.log(dirichlet))
    c1 = math.exp(log_c1)
    log_c2 = -((n / pc) * (log_c1 - math.log(p))
               + log_gamma(n / pc + 1.0) + math.log(unit_ball_volume(n)))
    return ExtremizerParams(kind="lsi", n=n, p=p, c1=c1, c2=math.exp(log_c2),
                            log_norm_pp=log_norm_pp)


def ghc_params(g, alpha: float, t: float, order: int = 12) -> ExtremizerParams:
    """Gaussian matching data: a = int e^((alpha+t) Q_t g) dmu, k = e^(-|x0|^2/2)."""
    n = g.n if isinstance(g, RadialProfile) else g.dim
    image = inf_convolve_fast(g, HopfLaxParams(p=2.0, t=t))
    log_a = funcrep.log_density_integral(image, GAUSSIAN, alpha + t, order)
    return ExtremizerParams(kind="ghc", n=n, p=2.0, a=math.exp(log_a),
                            log_a=log_a, alpha=alpha, t=t, k=1.0)


def _model_log(params: ExtremizerParams, x0):
    """Exact log of the translated model density for each kind."""
    kind = params.kind
    if kind == "hc":
        theta, pc = params.theta, params.p / (params.p - 1.0)

        def radial(r):
            return -theta * np.power(np.abs(r), pc) / pc

        def log_model_1d(x):
            return radial(x - (x0[0] if x0 is not None else 0.0))

        return radial, log_model_1d
    if kind == "lsi":
        c1, c2, p = params.c1, params.c2, params.p
        pc = p / (p - 1.0)
        logc2 = math.log(c2)

        def radial(r):
            return logc2 - (p / c1) * np.power(np.abs(r), pc)

        def log_model_1d(x):
            return radial(x - (x0[0] if x0 is not None else 0.0))

        return radial, log_model_1d
    if kind == "ghc":
        v = np.zeros(params.n) if x0 is None else np.atleast_1d(np.asarray(x0, float))
        logk = -0.5 * float(np.dot(v, v))

        def radial(r):
            # only valid for x0 = 0 (model is constant k = 1)
            return np.zeros_like(np.asarray(r, float)) + logk

        def log_model_1d(x):
            return logk + v[0] * np.asarray(x, float)

        return radial, log_model_1d
    raise ValueError(f"unknown kind {kind!r}")


def _normalized_input_log(g_or_f, params: ExtremizerParams):
    """log of the normalized input density compared against the model."""
    if params.kind == "hc":
        shift = -(params.alpha / params.beta) * params.log_a
        return lambda pts: params.alpha * g_or_f.log_at(pts) + shift
    if params.kind == "lsi":
        return lambda pts: params.p * g_or_f.log_at(pts) - params.log_norm_pp
    if params.kind == "ghc":
        shift = -(params.alpha / (params.alpha + params.t)) * params.log_a
        return lambda pts: params.alpha * g_or_f.log_at(pts) + shift
    raise ValueError(f"unknown kind {params.kind!r}")


def l1_model_distance(g_or_f, params: ExtremizerParams, x0=None,
                      order: int = 12) -> float:
    """L1 (or L1(dmu) for the Gaussian kind) distance between the
    translated model and the normalized input."""
    measure = GAUSSIAN if params.kind == "ghc" else LEBESGUE
    if isinstance(g_or_f, RadialProfile):
        if x0 is not None and np.any(np.atleast_1d(np.asarray(x0)) != 0.0):
            raise ValueError("radial inputs pin the translation to the origin")
        input_log = _normalized_input_log(g_or_f, params)
        radial_model, _ = _model_log(params, None)
        tail = g_or_f.tail.scaled(params.alpha if params.kind != "lsi" else params.p) \
            if g_or_f.tail is not None else None
        return integrate_abs_difference(
            g_or_f.n, radial_model, input_log, g_or_f.r,
            measure=measure, order=order, tail=tail,
            extend=g_or_f.tail is not None or g_or_f.exact is not None)
    if isinstance(g_or_f, GridFunction) and g_or_f.dim == 1:
        input_log = _normalized_input_log(g_or_f, params)
        _, model_1d = _model_log(params, np.atleast_1d(x0) if x0 is not None else None)
        return _grid_abs_distance_1d(g_or_f, model_1d, input_log, measure, order)
    if isinstance(g_or_f, GridFunction) and g_or_f.dim == 2:
        v = np.zeros(2) if x0 is None else np.atleast_1d(np.asarray(x0, float))
        return _grid_abs_distance_2d(g_or_f, params, v, measure, order)
    raise TypeError(f"unsupported representation {type(g_or_f)!r}")


def _grid_abs_distance_1d(gf, model_1d, input_log, measure, order):
    """|e^A - e^B| over the grid span (plus extension when exact)."""

    def log_absdiff(x):
        a = model_1d(x)
        b = input_log(x)
        m = np.maximum(a, b)
        with np.errstate(invalid="ignore"):
            small = np.exp(np.minimum(a, b) - m)
        small = np.where(np.isfinite(m), small, 0.0)
        with np.errstate(divide="ignore"):
            out = m + np.log1p(-small)
        return np.where(np.isfinite(m), out, -np.inf)

    # split panels at sign changes of A - B like the radial integrator
    xs = gf.xs
    probe = 0.5 * (xs[1:] + xs[:-1])
    with np.errstate(invalid="ignore"):
        diff = model_1d(probe) - input_log(probe)
    sign = np.sign(np.where(np.isnan(diff), 0.0, diff))
    flips = np.nonzero(sign[1:] * sign[:-1] < 0)[0]
    extra = []
    for k in flips:
        lo, hi = probe[k], probe[k + 1]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            d = float(model_1d(np.asarray([mid]))[0] - input_log(np.asarray([mid]))[0])
            if d == 0.0 or math.isnan(d):
                break
            if np.sign(d) == sign[k]:
                lo = mid
            else:
                hi = mid
        extra.append(0.5 * (lo + hi))
    edges = np.unique(np.concatenate([xs, np.asarray(extra, float)]))
    sums = funcrep._ShiftedSums()
    pts, wts = funcrep._panel_points(edges, order)
    weight = funcrep._log_gauss_weight_1d(pts, measure)
    sums.add(log_absdiff(pts) + weight, wts)
    # extension beyond the span (both model and input must be evaluable)
    if gf.exact is not None:
        for direction in (+1.0, -1.0):
            edge = edges[-1] if direction > 0 else edges[0]
            step = gf.spacing
            quiet = 0
            for _ in range(funcrep._EXTEND_MAX_PANELS):
                nxt = edge + direction * step
                a, b = (edge, nxt) if direction > 0 else (nxt, edge)
                pts, wts = funcrep._panel_points(np.linspace(a, b, 3), order)
                logs = log_absdiff(pts) + funcrep._log_gauss_weight_1d(pts, measure)
                contrib = sums.add(logs, wts)
                edge = nxt
                step *= 1.3
                if contrib <= funcrep._EXTEND_RTOL * max(sums.total, np.finfo(float).tiny):
                    quiet += 1
                    if quiet >= funcrep._EXTEND_QUIET:
                        break
                else:
                    quiet = 0
            else:
                break
    return math.exp(sums.log_total) if np.isfinite(sums.log_total) else 0.0


def _grid_abs_distance_2d(gf, params, v, measure, order):
    radial_model, _ = _model_log(params, None)

    def _input_2d(x, y):
        if params.kind == "hc":
            shift = -(params.alpha / params.beta) * params.log_a
            return params.alpha * gf.log_at(x, y) + shift
        if params.kind == "lsi":
            return params.p * gf.log_at(x, y) - params.log_norm_pp
        shift = -(params.alpha / (params.alpha + params.t)) * params.log_a
        return params.alpha * gf.log_at(x, y) + shift

    def log_pair(x, y):
        r = np.hypot(x - v[0], y - v[1])
        a = radial_model(r)
        b = _input_2d(x, y)
        m = np.maximum(a, b)
        with np.errstate(invalid="ignore"):
            small = np.exp(np.minimum(a, b) - m)
        small = np.where(np.isfinite(m), small, 0.0)
        with np.errstate(divide="ignore"):
            out = m + np.log1p(-small)
        return np.where(np.isfinite(m), out, -np.inf)

    u, w = funcrep._gl_unit(order)
    xs, ys = gf.xs, gf.ys
    px = (xs[:-1, None] + np.diff(xs)[:, None] * u[None, :]).ravel()
    wx = (np.diff(xs)[:, None] * w[None, :]).ravel()
    py = (ys[:-1, None] + np.diff(ys)[:, None] * u[None, :]).ravel()
    wy = (np.diff(ys)[:, None] * w[None, :]).ravel()
    sums = funcrep._ShiftedSums()
    for i in range(0, len(px), 256):
        sl = slice(i, i + 256)
        gx, gy = np.meshgrid(px[sl], py, indexing="ij")
        logs = log_pair(gx.ravel(), gy.ravel())
        if measure.is_gaussian:
            rr = gx.ravel() ** 2 + gy.ravel() ** 2
            logs = logs - 0.5 * rr - LOG_TWO_PI
        sums.add(logs, np.outer(wx[sl], wy).ravel())
    return math.exp(sums.log_total) if np.isfinite(sums.log_total) else 0.0


@dataclass
class FitResult:
    x0: np.ndarray
    distance: float
    multimodal: bool = False


def fit_translation(g_or_f, params: ExtremizerParams,
                    coarse_stride: int = 4, span_fraction: float = 0.25,
                    order: int = 8) -> FitResult:
    """Minimizes the L1 model distance over the translation x0.

    Radial inputs return x0 = 0 immediately.  Cartesian inputs get a
    coarse scan at ``coarse_stride`` grid spacings over the central
    ``span_fraction`` of the grid, then pattern-search refinement down
    to spacing/64.  Ties in the coarse scan break toward smaller |x0|;
    two coarse cells within 1% of each other set the multimodal flag.
    """
    if isinstance(g_or_f, RadialProfile):
        x0 = np.zeros(g_or_f.n)
        return FitResult(x0=x0, distance=l1_model_distance(g_or_f, params, None, order))
    if not isinstance(g_or_f, GridFunction):
        raise TypeError(f"unsupported representation {type(g_or_f)!r}")
    dim = g_or_f.dim
    h = g_or_f.spacing
    span = (g_or_f.logvals.shape[0] - 1) * h
    reach = span_fraction * span
    offsets = np.arange(-reach, reach + 1e-12, coarse_stride * h)

    def dist(v):
        return l1_model_distance(g_or_f, params, np.atleast_1d(v), order)

    if dim == 1:
        cand = [(dist(np.array([v])), abs(v), v) for v in offsets]
    else:
        cand = [(dist(np.array([vx, vy])), math.hypot(vx, vy), (vx, vy))
                for vx in offsets for vy in offsets]
    cand.sort(key=lambda rec: (rec[0], rec[1]))
    best_d, _, best_v = cand[0]
    multimodal = False
    if len(cand) > 1:
        d2, _, v2 = cand[1]
        far = (abs(np.atleast_1d(v2) - np.atleast_1d(best_v)) > 1.5 * coarse_stride * h).any()
        if far and d2 <= 1.01 * max(best_d, 1e-300):
            multimodal = True
    # pattern search: halve the step from the coarse stride to h/64
    x = np.atleast_1d(np.asarray(best_v, float))
    step = coarse_stride * h
    fx = best_d
    while step > h / 64.0:
        step *= 0.5
        improved = True
        while improved:
            improved = False
            for axis in range(dim):
                for delta in (+step, -step):
                    trial = x.copy()
                    trial[axis] += delta
                    ft = dist(trial)
                    if ft < fx:
                        x, fx = trial, ft
                        improved = True
    return FitResult(x0=x, distance=fx, multimodal=multimodal)
