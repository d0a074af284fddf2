"""Prekopa-Leindler triples built from the Hopf-Lax flow.

For 0 < alpha < beta and the evolved exponent Q_t g, the triple

    u = e^(beta Q_t g),   v = e^(-theta0 |x|^p' / p'),   w = e^(alpha g(beta x / alpha)),

with theta0 = beta ((beta - alpha)/(alpha t))^(p'-1), satisfies the
Prekopa-Leindler hypothesis u(x)^lam v(y)^(1-lam) <= w(lam x + (1-lam) y)
at lam = alpha/beta; when alpha > beta/2 the complementary construction
swaps the roles of u and v at lam = 1 - alpha/beta.  The relative excess

    epsilon = int w / ((int u)^lam (int v)^(1-lam)) - 1

coincides with the hypercontractivity deficit of g; the Gaussian triple
(weight folded into all three functions, lam = alpha/(alpha+t)) plays
the same role for the Gaussian deficit.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import funcrep
from .funcrep import LEBESGUE, LOG_TWO_PI, RadialProfile, TailDecay
from .deficits import HCParams
from .hopflax import HopfLaxParams, inf_convolve_fast

__all__ = [
    "PLTriple",
    "build_hc_triple",
    "build_gaussian_triple",
    "check_pl_hypothesis",
    "pl_epsilon",
    "pl_conclusion_distances",
]


@dataclass
class PLTriple:
    """Three nonnegative integrable functions and their convexity weight.

    The functions are radial log-evaluators over R^n (any Gaussian
    weight already folded in), each with a tail descriptor for the
    quadrature; ``lam`` is the weight on u, ``a`` = int u / int v.
    """

    n: int
    lam: float
    log_u: Callable
    log_v: Callable
    log_w: Callable
    u_tail: Optional[TailDecay]
    v_tail: Optional[TailDecay]
    w_tail: Optional[TailDecay]
    edges: np.ndarray
    theta0: float = math.nan
    swapped: bool = False  # complementary construction (alpha > beta/2)

    def log_integrals(self, order: int = 12):
        out = []
        for log_f, tail in ((self.log_u, self.u_tail), (self.log_v, self.v_tail),
                            (self.log_w, self.w_tail)):
            out.append(funcrep.log_radial_integral(
                self.n, log_f, self.edges, measure=LEBESGUE, tail=tail,
                order=order, extend=True))
        return tuple(out)


def build_hc_triple(g: RadialProfile, params: HCParams,
                    order: int = 12) -> PLTriple:
    """The triple certifying the hypercontractivity deficit of g.

    theta0 = beta ((beta-alpha)/(alpha t))^(p'-1) = (beta/alpha)^p' theta.
    For alpha > beta/2 the complementary construction applies: same
    three functions, weight 1 - alpha/beta, and u, v swap roles in the
    hypothesis.
    """
    if not isinstance(g, RadialProfile):
        raise TypeError("PL triples are built from radial profiles")
    alpha, beta, pc = params.alpha, params.beta, params.p_conj
    theta0 = beta * ((beta - alpha) / (alpha * params.t)) ** (pc - 1.0)
    image = inf_convolve_fast(g, params.hopf_lax())

    log_u = lambda r: beta * image.log_at(r)
    log_v = lambda r: -(theta0 / pc) * np.power(r, pc)
    w_view = g.arg_scaled(beta / alpha).scaled(alpha)
    log_w = w_view.log_at

    u_tail = image.tail.scaled(beta) if image.tail is not None else None
    v_tail = TailDecay(0.0, theta0 / pc, pc)
    w_tail = w_view.tail

    swapped = alpha > 0.5 * beta
    lam = (1.0 - alpha / beta) if swapped else alpha / beta
    if swapped:
        log_u, log_v = log_v, log_u
        u_tail, v_tail = v_tail, u_tail
    return PLTriple(n=g.n, lam=lam, log_u=log_u, log_v=log_v, log_w=log_w,
                    u_tail=u_tail, v_tail=v_tail, w_tail=w_tail,
                    edges=g.r, theta0=theta0, swapped=swapped)


def build_gaussian_triple(g: RadialProfile, alpha: float, t: float,
                          order: int = 12) -> PLTriple:
    """Gaussian triple: weight (2 pi)^(-n/2) e^(-|x|^2/2) folded into all
    three functions; lam = alpha/(alpha + t); quadratic cost flow."""
    if not (alpha > 0.0 and t > 0.0):
        raise ValueError("need alpha > 0 and t > 0")
    image = inf_convolve_fast(g, HopfLaxParams(p=2.0, t=t))
    n = g.n
    half_log = 0.5 * n * LOG_TWO_PI

    log_u = lambda r: (alpha + t) * image.log_at(r) - 0.5 * r * r - half_log
    log_v = lambda r: -0.5 * r * r - half_log
    log_w = lambda r: alpha * g.log_at(r) - 0.5 * r * r - half_log

    def fold(tail, scale):
        if tail is None:
            return TailDecay(-half_log, 0.5, 2.0)
        if abs(tail.q - 2.0) <= 1e-12:
            return TailDecay(scale * tail.c1 - half_log, scale * tail.c2 + 0.5, 2.0)
        # slower-than-quadratic decay: keep the dominant Gaussian factor
        return TailDecay(scale * tail.c1 - half_log, 0.5, 2.0)

    return PLTriple(n=n, lam=alpha / (alpha + t),
                    log_u=log_u, log_v=log_v, log_w=log_w,
                    u_tail=fold(image.tail, alpha + t),
                    v_tail=TailDecay(-half_log, 0.5, 2.0),
                    w_tail=fold(g.tail, alpha),
                    edges=g.r)


def check_pl_hypothesis(triple: PLTriple, samples: int = 10000,
                        seed: int = 0, radius: Optional[float] = None) -> float:
    """Worst sampled violation of the hypothesis, in the log domain:

        max over (x, y) of  lam log u(x) + (1-lam) log v(y) - log w(lam x + (1-lam) y)

    over random pairs plus the diagonal and the axis slices.  A value
    <= 0 (up to interpolation noise) confirms the hypothesis.
    """
    rng = np.random.default_rng(seed)
    n = triple.n
    if radius is None:
        radius = 0.5 * float(triple.edges[-1])
    m = samples
    xs = rng.uniform(-radius, radius, size=(m, n))
    ys = rng.uniform(-radius, radius, size=(m, n))
    # deterministic extras: the diagonal and both axis slices
    ticks = np.linspace(-radius, radius, 64)
    diag = np.zeros((64, n))
    diag[:, 0] = ticks
    xs = np.vstack([xs, diag, diag, np.zeros_like(diag)])
    ys = np.vstack([ys, diag, np.zeros_like(diag), diag])
    lam = triple.lam
    rx = np.linalg.norm(xs, axis=1)
    ry = np.linalg.norm(ys, axis=1)
    rm = np.linalg.norm(lam * xs + (1.0 - lam) * ys, axis=1)
    with np.errstate(invalid="ignore"):
        viol = lam * triple.log_u(rx) + (1.0 - lam) * triple.log_v(ry) \
            - triple.log_w(rm)
    viol = viol[np.isfinite(viol)]
    return float(np.max(viol)) if len(viol) else -math.inf


def pl_epsilon(triple: PLTriple, order: int = 12) -> float:
    """epsilon = int w / ((int u)^lam (int v)^(1-lam)) - 1, in the log domain."""
    log_iu, log_iv, log_iw = triple.log_integrals(order)
    eps = math.expm1(log_iw - triple.lam * log_iu - (1.0 - triple.lam) * log_iv)
    if eps < -1e-9:
        raise funcrep.DivergenceError(
            f"Prekopa-Leindler excess {eps:.3e} is negative; inputs inconsistent")
    return max(eps, 0.0)


def pl_conclusion_distances(triple: PLTriple, x0: float = 0.0,
                            y0: float = 0.0, order: int = 12):
    """The two L1 terms of the stability conclusion:

        int |u(x) - a v(x - x0)| dx   and   a int |a^(-lam) w(x) - v(x - y0)| dx,

    with a = int u / int v.  Only centered translations are supported
    for radial triples (x0 = y0 = 0).
    """
    if x0 != 0.0 or y0 != 0.0:
        raise ValueError("radial triples pin both translations to the origin")
    log_iu, log_iv, _ = triple.log_integrals(order)
    log_a = log_iu - log_iv
    term1 = funcrep.integrate_abs_difference(
        triple.n, triple.log_u, lambda r: log_a + triple.log_v(r),
        triple.edges, order=order, tail=triple.u_tail, extend=True)
    term2 = math.exp(log_a) * funcrep.integrate_abs_difference(
        triple.n, lambda r: triple.log_w(r) - triple.lam * log_a, triple.log_v,
        triple.edges, order=order, tail=triple.v_tail, extend=True)
    return term1, term2
