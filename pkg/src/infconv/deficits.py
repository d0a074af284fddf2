"""Deficit functionals and their optimal constants.

Four nonnegative deficits are assembled here, every one in the log
domain so that ratios of Gaussian-type norms never overflow:

* ``hc_deficit``   -- hypercontractivity deficit of the Hopf-Lax flow
  on Lebesgue measure, against the optimal constant C_{p,t,alpha,beta},
* ``lsi_deficit``  -- deficit in the sharp L^p Euclidean log-Sobolev
  inequality with constant L_{n,p},
* ``ghc_deficit``  -- Gaussian hypercontractivity deficit (p = 2 cost,
  norms against the standard Gaussian measure),
* ``glsi_deficit`` -- Gaussian log-Sobolev deficit.

The short-time limits connecting the hypercontractivity deficits to the
log-Sobolev ones (with the norm exponent schedule beta(t) = 1 + y t and
its Gaussian analogue alpha + t) are implemented as ladder
extrapolations.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import funcrep
from .funcrep import GAUSSIAN, LEBESGUE
from .hopflax import HopfLaxParams, inf_convolve_fast
from .specfun import log_gamma, unit_ball_volume

__all__ = [
    "HCParams",
    "DeficitReport",
    "NegativeDeficitError",
    "hc_optimal_constant",
    "log_hc_optimal_constant",
    "hc_deficit",
    "lsi_optimal_constant",
    "lsi_deficit",
    "y_value",
    "hc_lsi_limit",
    "ghc_deficit",
    "glsi_deficit",
    "ghc_glsi_limit",
    "LimitCheck",
]

_CLAMP_TOL = 1e-9


class NegativeDeficitError(RuntimeError):
    """A deficit came out below the clamp tolerance; that is a bug."""


@dataclass(frozen=True)
class HCParams:
    """Exponent p, time t, and norm exponents 0 < alpha < beta."""

    p: float
    t: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError(f"p must be > 1, got {self.p!r}")
        if not self.t > 0.0:
            raise ValueError(f"t must be > 0, got {self.t!r}")
        if not (0.0 < self.alpha < self.beta):
            raise ValueError(
                f"need 0 < alpha < beta, got alpha={self.alpha!r} beta={self.beta!r}")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def lam(self) -> float:
        return self.alpha / self.beta

    @property
    def tau(self) -> float:
        return min(self.lam, 1.0 - self.lam)

    def hopf_lax(self) -> HopfLaxParams:
        return HopfLaxParams(p=self.p, t=self.t)


@dataclass
class DeficitReport:
    """A deficit value with every intermediate that produced it."""

    deficit: float
    constant_used: float
    norms: dict
    params: dict

    def to_record(self) -> str:
        lines = [f"deficit = {self.deficit:.17g}",
                 f"constant_used = {self.constant_used:.17g}"]
        for key in sorted(self.norms):
            lines.append(f"{key} = {self.norms[key]:.17g}")
        for key in sorted(self.params):
            lines.append(f"{key} = {self.params[key]:.17g}")
        return "\n".join(lines)


def _finalize(raw: float) -> float:
    if raw < -_CLAMP_TOL:
        raise NegativeDeficitError(
            f"deficit {raw:.3e} below -{_CLAMP_TOL:.0e}; the quadrature or the "
            "inputs are inconsistent")
    if raw < 0.0:
        warnings.warn(f"clamping tiny negative deficit {raw:.3e} to zero",
                      RuntimeWarning, stacklevel=3)
        return 0.0
    return raw


def log_hc_optimal_constant(n: int, params: HCParams) -> float:
    """log C_{p,t,alpha,beta}; returns 0 in the degenerate alpha = beta limit."""
    p, t, a, b = params.p, params.t, params.alpha, params.beta
    if a == b:
        return 0.0
    pc = params.p_conj
    geom = (n / pc) * math.log(pc) + log_gamma(n / pc + 1.0) \
        + math.log(unit_ball_volume(n))
    return ((n / p) * ((b - a) / (a * b)) * math.log((b - a) / t)
            + (n / (a * b)) * (a / p + b / pc) * math.log(a)
            - (n / (a * b)) * (b / p + a / pc) * math.log(b)
            + ((a - b) / (a * b)) * geom)


def hc_optimal_constant(n: int, params: HCParams) -> float:
    return math.exp(log_hc_optimal_constant(n, params))


def hc_deficit(g, params: HCParams, order: int = 12) -> DeficitReport:
    """delta = C^alpha ||e^g||_alpha^alpha / ||e^(Q_t g)||_beta^alpha - 1."""
    image = inf_convolve_fast(g, params.hopf_lax())
    log_norm_g = funcrep.log_norm_alpha(g, params.alpha, LEBESGUE, order)
    log_norm_q = funcrep.log_norm_alpha(image, params.beta, LEBESGUE, order)
    log_c = log_hc_optimal_constant(g.n, params)
    raw = math.expm1(params.alpha * (log_c + log_norm_g - log_norm_q))
    return DeficitReport(
        deficit=_finalize(raw),
        constant_used=math.exp(log_c),
        norms={"log_norm_initial": log_norm_g, "log_norm_evolved": log_norm_q,
               "log_constant": log_c},
        params={"n": g.n, "p": params.p, "t": params.t,
                "alpha": params.alpha, "beta": params.beta},
    )


def lsi_optimal_constant(n: int, p: float) -> float:
    """L_{n,p} = (p/n) ((p-1)/e)^(p-1) (Gamma(n/p'+1) omega_n)^(-p/n)."""
    if not (n >= 1 and p > 1.0):
        raise ValueError("need n >= 1 and p > 1")
    pc = p / (p - 1.0)
    log_l = (math.log(p / n) + (p - 1.0) * (math.log(p - 1.0) - 1.0)
             - (p / n) * (log_gamma(n / pc + 1.0) + math.log(unit_ball_volume(n))))
    return math.exp(log_l)


def lsi_deficit(f, p: float, order: int = 12) -> DeficitReport:
    """delta = (n/p) log(L_{n,p} int|grad f|^p / ||f||_p^p) - Ent(f^p)/||f||_p^p."""
    n = f.n
    log_norm_pp = funcrep.log_density_integral(f, LEBESGUE, p, order)
    dirichlet = funcrep.grad_norm_p(f, p, LEBESGUE, order)
    if dirichlet <= 0.0:
        raise ValueError("zero Dirichlet energy; the log-Sobolev deficit is undefined")
    ent = funcrep.entropy(f.scaled(p), LEBESGUE, order)
    l_np = lsi_optimal_constant(n, p)
    raw = ((n / p) * (math.log(l_np) + math.log(dirichlet) - log_norm_pp)
           - ent / math.exp(log_norm_pp))
    return DeficitReport(
        deficit=_finalize(raw),
        constant_used=l_np,
        norms={"log_norm_p_pow_p": log_norm_pp, "dirichlet": dirichlet,
               "entropy": ent},
        params={"n": n, "p": p},
    )


def y_value(g, p: float, order: int = 12) -> float:
    """y = (1/n) int e^g |grad g|^p dx / int e^g dx.

    Equivalently (p^p / n) int |grad f|^p / ||f||_p^p for f = e^(g/p).
    """
    f = g.scaled(1.0 / p)
    dirichlet = funcrep.grad_norm_p(f, p, LEBESGUE, order)
    log_mass = funcrep.log_density_integral(g, LEBESGUE, 1.0, order)
    y = (p ** p / g.n) * dirichlet / math.exp(log_mass)
    if not (0.0 < y < math.inf):
        raise ValueError(f"derived slope y={y!r} is not in (0, inf)")
    return y


@dataclass
class LimitCheck:
    """Result of a ladder extrapolation against an analytic target."""

    empirical: float
    target: float
    points: list  # (t, ratio)

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.target), 1e-300)
        return abs(self.empirical - self.target) / scale


def _richardson(ts, ratios):
    ts = np.asarray(ts, float)
    ratios = np.asarray(ratios, float)
    if len(ts) >= 2:
        rho = ts[-1] / ts[-2]
        return float((ratios[-1] - rho * ratios[-2]) / (1.0 - rho))
    return float(ratios[-1])


def hc_lsi_limit(g, p: float, t_ladder, order: int = 12) -> LimitCheck:
    """Checks  delta^HC_{p,t,1,1+yt} / t  ->  y * delta^LSI(e^(g/p))  as t -> 0."""
    y = y_value(g, p, order)
    f = g.scaled(1.0 / p)
    target = y * lsi_deficit(f, p, order).deficit
    points = []
    for t in t_ladder:
        params = HCParams(p=p, t=float(t), alpha=1.0, beta=1.0 + y * float(t))
        d = hc_deficit(g, params, order).deficit
        points.append((float(t), d / float(t)))
    empirical = _richardson([t for t, _ in points], [rr for _, rr in points])
    return LimitCheck(empirical=empirical, target=target, points=points)


def ghc_deficit(g, alpha: float, t: float,
                order: int = 12) -> DeficitReport:
    """delta = ||e^g||_{alpha,mu}^alpha / ||e^(Q_t g)||_{alpha+t,mu}^alpha - 1.

    The flow always uses the quadratic cost |x-y|^2/(2t).
    """
    if not (alpha > 0.0 and t > 0.0):
        raise ValueError("need alpha > 0 and t > 0")
    image = inf_convolve_fast(g, HopfLaxParams(p=2.0, t=t))
    log_norm_g = funcrep.log_norm_alpha(g, alpha, GAUSSIAN, order)
    log_norm_q = funcrep.log_norm_alpha(image, alpha + t, GAUSSIAN, order)
    raw = math.expm1(alpha * (log_norm_g - log_norm_q))
    return DeficitReport(
        deficit=_finalize(raw),
        constant_used=1.0,
        norms={"log_norm_initial_mu": log_norm_g, "log_norm_evolved_mu": log_norm_q},
        params={"n": g.n, "alpha": alpha, "t": t},
    )


def glsi_deficit(f, order: int = 12) -> DeficitReport:
    """delta = (2 int |grad f|^2 dmu - Ent_mu(f^2)) / int f^2 dmu."""
    dirichlet = funcrep.grad_norm_p(f, 2.0, GAUSSIAN, order)
    ent = funcrep.entropy(f.scaled(2.0), GAUSSIAN, order)
    log_mass = funcrep.log_density_integral(f, GAUSSIAN, 2.0, order)
    raw = (2.0 * dirichlet - ent) / math.exp(log_mass)
    return DeficitReport(
        deficit=_finalize(raw),
        constant_used=1.0,
        norms={"dirichlet_mu": dirichlet, "entropy_mu": ent,
               "log_mass_mu": log_mass},
        params={"n": f.n},
    )


def ghc_glsi_limit(g, t_ladder, order: int = 12) -> LimitCheck:
    """Checks  delta^GHC_{1,t}(g) / t  ->  delta^GLSI(e^(g/2))  as t -> 0."""
    target = glsi_deficit(g.scaled(0.5), order).deficit
    points = []
    for t in t_ladder:
        d = ghc_deficit(g, 1.0, float(t), order).deficit
        points.append((float(t), d / float(t)))
    empirical = _richardson([t for t, _ in points], [rr for _, rr in points])
    return LimitCheck(empirical=empirical, target=target, points=points)
