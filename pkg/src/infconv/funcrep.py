"""Function representations and quadrature.

Functions live in the log domain: a profile stores the exponent g, the
object of interest being the density e^g.  Two representations are
supported:

* ``RadialProfile`` -- g(r) on a grid of radii r >= 0 in ambient
  dimension n, with piecewise-linear interpolation of the exponent, an
  optional analytic tail ``g(r) ~ c1 - c2 r^q`` past the grid, and an
  optional exact evaluator that overrides interpolation.
* ``GridFunction`` -- g on a uniform 1D or 2D Cartesian grid.

Integrals are composite Gauss-Legendre over the grid panels, assembled
with a max-shift in the exponent so that Gaussian-type densities never
underflow.  Truncation past the last node is certified against the tail
descriptor and the integrator keeps extending panels until the running
contribution is negligible.
"""

import math
import warnings
from dataclasses import dataclass
import numpy as np

from .specfun import log_power_exponential_integral, unit_ball_volume

__all__ = [
    "DivergenceError",
    "Measure",
    "LEBESGUE",
    "GAUSSIAN",
    "TailDecay",
    "RadialProfile",
    "GridFunction",
    "make_radial_grid",
    "radial_integral",
    "log_radial_integral",
    "log_norm_alpha",
    "entropy",
    "grad_norm_p",
    "schwarz_rearrange",
    "log_grid_integral",
    "log_density_integral",
    "integrate_abs_difference",
    "save_function",
    "load_function",
]

LOG_TWO_PI = math.log(2.0 * math.pi)

# Relative size at which an extension panel counts as negligible, and
# the number of consecutive negligible panels required to stop.
_EXTEND_RTOL = 1e-16
_EXTEND_QUIET = 3
_EXTEND_MAX_PANELS = 600


class DivergenceError(RuntimeError):
    """An integral or infimum could not be certified finite."""


@dataclass(frozen=True)
class Measure:
    kind: str  # "lebesgue" or "gaussian"

    @property
    def is_gaussian(self) -> bool:
        return self.kind == "gaussian"


LEBESGUE = Measure("lebesgue")
GAUSSIAN = Measure("gaussian")


@dataclass(frozen=True)
class TailDecay:
    """Analytic tail of the exponent: g(r) ~ c1 - c2 r^q past the grid."""

    c1: float
    c2: float
    q: float

    def __post_init__(self):
        if not self.q > 1.0:
            raise ValueError(f"tail exponent q must be > 1, got {self.q!r}")
        if not self.c2 > 0.0:
            raise ValueError(f"tail coefficient c2 must be > 0, got {self.c2!r}")

    def log_eval(self, r):
        r = np.asarray(r, dtype=float)
        return self.c1 - self.c2 * np.power(r, self.q)

    def scaled(self, c: float) -> "TailDecay":
        if not c > 0.0:
            raise ValueError("exponent scale must be positive")
        return TailDecay(c * self.c1, c * self.c2, self.q)

    def shifted(self, c: float) -> "TailDecay":
        return TailDecay(self.c1 + c, self.c2, self.q)

    def arg_scaled(self, s: float) -> "TailDecay":
        """Tail of r -> g(s r)."""
        if not s > 0.0:
            raise ValueError("argument scale must be positive")
        return TailDecay(self.c1, self.c2 * s ** self.q, self.q)


def _as_vector_fn(fn):
    def wrapped(r):
        return np.asarray(fn(np.asarray(r, dtype=float)), dtype=float)
    return wrapped


class RadialProfile:
    """A radially symmetric exponent g(r) in ambient dimension n.

    Parameters
    ----------
    n : ambient dimension (>= 1)
    r : strictly increasing radii, r[0] == 0, at least 16 nodes
    logvals : g(r_i); the represented density is e^g
    tail : optional TailDecay describing g past r[-1]
    exact : optional vectorized exact evaluator r -> g(r); when present
        it overrides interpolation everywhere
    exact_dlog : optional vectorized exact derivative r -> g'(r)
    """

    def __init__(self, n, r, logvals, tail=None, exact=None, exact_dlog=None):
        r = np.asarray(r, dtype=float)
        logvals = np.asarray(logvals, dtype=float)
        if r.ndim != 1 or r.shape != logvals.shape:
            raise ValueError("r and logvals must be 1D arrays of equal length")
        if len(r) < 16:
            raise ValueError(f"radial grid needs at least 16 nodes, got {len(r)}")
        if r[0] != 0.0:
            raise ValueError("radial grid must start at r = 0")
        if np.any(np.diff(r) <= 0.0):
            raise ValueError("radial grid must be strictly increasing")
        if not (isinstance(n, (int, np.integer)) and n >= 1):
            raise ValueError(f"ambient dimension must be an integer >= 1, got {n!r}")
        self.n = int(n)
        self.r = r
        self.logvals = logvals
        self.tail = tail
        self.exact = _as_vector_fn(exact) if exact is not None else None
        self.exact_dlog = _as_vector_fn(exact_dlog) if exact_dlog is not None else None
        if tail is not None and exact is None and np.isfinite(logvals[-1]):
            gap = abs(logvals[-1] - float(tail.log_eval(r[-1])))
            scale = 1.0 + abs(logvals[-1])
            if gap > 1e-3 * scale:
                warnings.warn(
                    f"tail descriptor disagrees with last node by {gap:.3g}",
                    RuntimeWarning, stacklevel=2)

    @property
    def rmax(self) -> float:
        return float(self.r[-1])

    def log_at(self, r):
        """Exponent at arbitrary radii (interpolation + tail, or exact)."""
        r = np.asarray(r, dtype=float)
        if self.exact is not None:
            return self.exact(r)
        out = np.interp(r, self.r, self.logvals)
        beyond = r > self.r[-1]
        if np.any(beyond):
            if self.tail is None:
                raise DivergenceError(
                    "evaluation beyond the grid requires a tail descriptor")
            out = np.where(beyond, self.tail.log_eval(r), out)
        return out

    def dlog_at(self, r):
        """Derivative of the exponent; finite differences unless exact."""
        r = np.asarray(r, dtype=float)
        if self.exact_dlog is not None:
            return self.exact_dlog(r)
        slopes = self._node_slopes()
        out = np.interp(r, self.r, slopes)
        beyond = r > self.r[-1]
        if np.any(beyond):
            if self.tail is None:
                raise DivergenceError(
                    "derivative beyond the grid requires a tail descriptor")
            t = self.tail
            out = np.where(beyond, -t.c2 * t.q * np.power(r, t.q - 1.0), out)
        return out

    def _node_slopes(self):
        r, v = self.r, self.logvals
        slopes = np.empty_like(v)
        slopes[1:-1] = (v[2:] - v[:-2]) / (r[2:] - r[:-2])
        slopes[-1] = (v[-1] - v[-2]) / (r[-1] - r[-2])
        # the derivative of |x|^q, q < 2, is singular at the origin, so the
        # origin slope is taken one-sided from the first interior node
        slopes[0] = (v[2] - v[1]) / (r[2] - r[1])
        return slopes

    # ---- view combinators (all pure) ----

    def scaled(self, c: float) -> "RadialProfile":
        """Profile of c * g."""
        if not c > 0.0:
            raise ValueError("exponent scale must be positive")
        exact = (lambda rr, f=self.exact: c * f(rr)) if self.exact else None
        dlog = (lambda rr, f=self.exact_dlog: c * f(rr)) if self.exact_dlog else None
        return RadialProfile(self.n, self.r, c * self.logvals,
                             tail=self.tail.scaled(c) if self.tail else None,
                             exact=exact, exact_dlog=dlog)

    def shifted(self, c: float) -> "RadialProfile":
        """Profile of g + c."""
        exact = (lambda rr, f=self.exact: f(rr) + c) if self.exact else None
        return RadialProfile(self.n, self.r, self.logvals + c,
                             tail=self.tail.shifted(c) if self.tail else None,
                             exact=exact, exact_dlog=self.exact_dlog)

    def arg_scaled(self, s: float) -> "RadialProfile":
        """Profile of r -> g(s r)."""
        if not s > 0.0:
            raise ValueError("argument scale must be positive")
        exact = (lambda rr, f=self.exact: f(s * rr)) if self.exact else None
        dlog = (lambda rr, f=self.exact_dlog: s * f(s * rr)) if self.exact_dlog else None
        return RadialProfile(self.n, self.r / s, self.logvals,
                             tail=self.tail.arg_scaled(s) if self.tail else None,
                             exact=exact, exact_dlog=dlog)

    def resampled(self, r_new) -> "RadialProfile":
        return RadialProfile(self.n, r_new, self.log_at(r_new), tail=self.tail,
                             exact=self.exact, exact_dlog=self.exact_dlog)


class GridFunction:
    """Exponent g sampled on a uniform 1D or 2D Cartesian grid."""

    def __init__(self, dim, origin, spacing, logvals, exact=None, exact_dlog=None):
        logvals = np.asarray(logvals, dtype=float)
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim!r}")
        if logvals.ndim != dim:
            raise ValueError("logvals shape must match dim")
        if not spacing > 0.0:
            raise ValueError("spacing must be positive")
        self.dim = dim
        self.n = dim  # ambient dimension coincides with the grid dimension
        self.origin = np.atleast_1d(np.asarray(origin, dtype=float))
        self.spacing = float(spacing)
        self.logvals = logvals
        self.exact = exact
        self.exact_dlog = exact_dlog  # 1D only

    @property
    def xs(self):
        return self.origin[0] + self.spacing * np.arange(self.logvals.shape[0])

    @property
    def ys(self):
        if self.dim != 2:
            raise ValueError("ys only defined for 2D grids")
        return self.origin[1] + self.spacing * np.arange(self.logvals.shape[1])

    def log_at(self, *coords):
        """(Bi)linear interpolation of the exponent; exact overrides."""
        if self.exact is not None:
            return np.asarray(self.exact(*[np.asarray(c, float) for c in coords]),
                              dtype=float)
        if self.dim == 1:
            (x,) = coords
            return np.interp(np.asarray(x, float), self.xs, self.logvals)
        x = np.asarray(coords[0], float)
        y = np.asarray(coords[1], float)
        return _bilinear(self.xs, self.ys, self.logvals, x, y)

    def dlog_at(self, x):
        """1D derivative of the exponent (finite differences unless exact)."""
        if self.dim != 1:
            raise ValueError("dlog_at is only defined for 1D grids")
        x = np.asarray(x, dtype=float)
        if self.exact_dlog is not None:
            return np.asarray(self.exact_dlog(x), dtype=float)
        v = self.logvals
        xs = self.xs
        slopes = np.empty_like(v)
        slopes[1:-1] = (v[2:] - v[:-2]) / (2.0 * self.spacing)
        slopes[0] = (v[1] - v[0]) / self.spacing
        slopes[-1] = (v[-1] - v[-2]) / self.spacing
        return np.interp(x, xs, slopes)

    def shifted_arg(self, v) -> "GridFunction":
        """Grid of x -> g(x - v): translation by v (same samples, moved origin)."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        exact = None
        dlog = None
        if self.exact is not None:
            if self.dim == 1:
                exact = lambda x, f=self.exact: f(x - v[0])
            else:
                exact = lambda x, y, f=self.exact: f(x - v[0], y - v[1])
        if self.exact_dlog is not None and self.dim == 1:
            dlog = lambda x, f=self.exact_dlog: f(x - v[0])
        return GridFunction(self.dim, self.origin + v, self.spacing,
                            self.logvals, exact=exact, exact_dlog=dlog)

    def scaled(self, c: float) -> "GridFunction":
        """Grid of c * g."""
        if not c > 0.0:
            raise ValueError("exponent scale must be positive")
        exact = None
        dlog = None
        if self.exact is not None:
            if self.dim == 1:
                exact = lambda x, f=self.exact: c * f(x)
            else:
                exact = lambda x, y, f=self.exact: c * f(x, y)
        if self.exact_dlog is not None and self.dim == 1:
            dlog = lambda x, f=self.exact_dlog: c * f(x)
        return GridFunction(self.dim, self.origin, self.spacing,
                            c * self.logvals, exact=exact, exact_dlog=dlog)

    def shifted(self, c: float) -> "GridFunction":
        """Grid of g + c."""
        exact = None
        if self.exact is not None:
            if self.dim == 1:
                exact = lambda x, f=self.exact: f(x) + c
            else:
                exact = lambda x, y, f=self.exact: f(x, y) + c
        return GridFunction(self.dim, self.origin, self.spacing,
                            self.logvals + c, exact=exact,
                            exact_dlog=self.exact_dlog)


def _bilinear(xs, ys, vals, x, y):
    ix = np.clip(np.searchsorted(xs, x) - 1, 0, len(xs) - 2)
    iy = np.clip(np.searchsorted(ys, y) - 1, 0, len(ys) - 2)
    x0, x1 = xs[ix], xs[ix + 1]
    y0, y1 = ys[iy], ys[iy + 1]
    tx = np.clip((x - x0) / (x1 - x0), 0.0, 1.0)
    ty = np.clip((y - y0) / (y1 - y0), 0.0, 1.0)
    v00 = vals[ix, iy]
    v10 = vals[ix + 1, iy]
    v01 = vals[ix, iy + 1]
    v11 = vals[ix + 1, iy + 1]
    return ((1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10
            + (1 - tx) * ty * v01 + tx * ty * v11)


def make_radial_grid(rmax: float, num: int = 2048) -> np.ndarray:
    """Hybrid radial grid: geometric cluster near the origin, uniform bulk."""
    if not rmax > 0.0:
        raise ValueError("rmax must be positive")
    n_geo = max(num // 4, 8)
    geo = rmax * np.geomspace(1e-7, 0.1, n_geo)
    uni = np.linspace(0.1 * rmax, rmax, num - n_geo)
    return np.unique(np.concatenate([[0.0], geo, uni]))


# ---------------------------------------------------------------------------
# Gauss-Legendre panel machinery
# ---------------------------------------------------------------------------

_GL_CACHE: dict = {}


def _gl_unit(order: int):
    """Gauss-Legendre nodes/weights on (0, 1)."""
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


def _panel_points(edges: np.ndarray, order: int):
    """All GL points/weights for the panels delimited by ``edges``."""
    u, w = _gl_unit(order)
    a = edges[:-1, None]
    width = np.diff(edges)[:, None]
    pts = a + width * u[None, :]
    wts = width * w[None, :]
    return pts.ravel(), wts.ravel()


def _log_weight(n: int, r: np.ndarray, measure: Measure) -> np.ndarray:
    """log of the radial surface factor n omega_n r^(n-1), plus measure weight."""
    with np.errstate(divide="ignore"):
        out = math.log(n * unit_ball_volume(n)) + (n - 1) * np.log(r)
    if measure.is_gaussian:
        out = out - 0.5 * r * r - 0.5 * n * LOG_TWO_PI
    return out


class _ShiftedSums:
    """Accumulates sum(w * e^L) and sum(w * e^L * phi) with a common shift."""

    def __init__(self):
        self.shift = -np.inf
        self.total = 0.0
        self.weighted = 0.0

    def add(self, logs, weights, phi=None):
        finite = np.isfinite(logs)
        if not np.any(finite):
            return 0.0
        m = float(np.max(logs[finite]))
        if m > self.shift:
            if np.isfinite(self.shift):
                scale = math.exp(self.shift - m)
                self.total *= scale
                self.weighted *= scale
            self.shift = m
        vals = np.where(finite, np.exp(logs - self.shift), 0.0) * weights
        contrib = float(np.sum(vals))
        self.total += contrib
        if phi is not None:
            self.weighted += float(np.sum(vals * np.where(finite, phi, 0.0)))
        return contrib

    @property
    def log_total(self) -> float:
        if self.total <= 0.0:
            return -np.inf
        return self.shift + math.log(self.total)


def _certify_integrable(n, tail, measure, scale):
    """Entry check: can the tail guarantee a finite integral of e^(scale*g)?"""
    if tail is None:
        return  # compact support / empirical extension handles the rest
    coeff = scale * tail.c2
    if measure.is_gaussian:
        return  # decaying tail plus Gaussian weight always integrable
    if coeff <= 0.0 or tail.q <= 1.0:
        raise DivergenceError("tail descriptor does not certify a finite integral")


def _log_tail_bound(n, tail, measure, scale, radius):
    """Conservative log bound on the mass of e^(scale*g) beyond ``radius``.

    Uses e^(-c r^q) <= e^(-c R^q / 2) e^(-(c/2) r^q) and the closed form
    for the full power-exponential integral.
    """
    if tail is None:
        return -np.inf
    coeff = scale * tail.c2
    if measure.is_gaussian and coeff <= 0.0:
        coeff = coeff + 0.5  # the Gaussian weight supplies r^2 decay
        if coeff <= 0.0 or tail.q > 2.0:
            raise DivergenceError("tail grows faster than the Gaussian weight")
        q = min(tail.q, 2.0)
    else:
        q = tail.q
    return (scale * tail.c1 - 0.5 * coeff * radius ** q
            + log_power_exponential_integral(n, q, 0.5 * coeff))


def _extend_edges(last_edge: float, step_hint: float):
    """Yields growing panel edges past the grid."""
    edge = last_edge
    step = max(step_hint, 1e-3 * max(last_edge, 1.0))
    while True:
        new_edge = edge + step
        yield edge, new_edge
        edge = new_edge
        step *= 1.3


def _accumulate_radial(n, log_f, edges, measure, order, phi_fn=None,
                       tail=None, scale_for_tail=1.0, extend=True):
    sums = _ShiftedSums()
    pts, wts = _panel_points(edges, order)
    base = log_f(pts) + _log_weight(n, pts, measure)
    sums.add(base, wts, phi_fn(pts) if phi_fn else None)
    if not extend:
        return sums
    quiet = 0
    count = 0
    step_hint = float(edges[-1] - edges[-2]) if len(edges) > 1 else 1.0
    for a, b in _extend_edges(float(edges[-1]), step_hint):
        count += 1
        if count > _EXTEND_MAX_PANELS:
            raise DivergenceError("integral did not converge within the panel budget")
        sub = np.linspace(a, b, 3)
        pts, wts = _panel_points(sub, order)
        logs = log_f(pts) + _log_weight(n, pts, measure)
        contrib = sums.add(logs, wts, phi_fn(pts) if phi_fn else None)
        total = max(sums.total, np.finfo(float).tiny)
        if contrib <= _EXTEND_RTOL * total:
            quiet += 1
            if quiet >= _EXTEND_QUIET:
                bound = _log_tail_bound(n, tail, measure, scale_for_tail, b)
                if bound - sums.log_total < math.log(1e-13) or bound == -np.inf:
                    break
                quiet = 0  # tail bound still significant; keep going
        else:
            quiet = 0
    return sums


def log_radial_integral(n, log_f, edges, measure=LEBESGUE, tail=None,
                        order=12, scale_for_tail=1.0, extend=True) -> float:
    """log of integral over R^n of e^(log_f(|x|)) dm.

    ``log_f`` must be evaluable past the last edge whenever ``extend``;
    ``tail`` certifies integrability and the truncation bound.
    """
    _certify_integrable(n, tail, measure, scale_for_tail)
    sums = _accumulate_radial(n, log_f, np.asarray(edges, float), measure, order,
                              tail=tail, scale_for_tail=scale_for_tail,
                              extend=extend)
    return sums.log_total


def _profile_extendable(profile: RadialProfile) -> bool:
    if profile.exact is not None or profile.tail is not None:
        return True
    # compactly supported data: the last samples must have died off
    v = profile.logvals[np.isfinite(profile.logvals)]
    if len(v) == 0:
        return False
    return profile.logvals[-1] == -np.inf or (v.max() - profile.logvals[-1]) > 60.0


def _extendable_or_raise(profile, scale, measure):
    if profile.exact is None and profile.tail is None:
        if not _profile_extendable(profile):
            raise DivergenceError(
                "profile has no tail descriptor and does not visibly decay")
        return False  # treat as compactly supported
    _certify_integrable(profile.n, profile.tail, measure, scale)
    return True


def log_radial_density_integral(profile: RadialProfile, measure=LEBESGUE,
                                scale: float = 1.0, order: int = 12) -> float:
    """log of integral of e^(scale * g) against the measure."""
    extend = _extendable_or_raise(profile, scale, measure)
    log_f = lambda r: scale * profile.log_at(r)
    sums = _accumulate_radial(profile.n, log_f, profile.r, measure, order,
                              tail=profile.tail, scale_for_tail=scale,
                              extend=extend)
    return sums.log_total


def radial_integral(h: RadialProfile, measure: Measure = LEBESGUE,
                    order: int = 12) -> float:
    """integral over R^n of e^h dm for a radial integrand exponent h."""
    return math.exp(log_radial_density_integral(h, measure, 1.0, order))


def log_norm_alpha(g, alpha: float, measure: Measure = LEBESGUE,
                   order: int = 12) -> float:
    """log of the L^alpha norm of e^g: (1/alpha) log integral e^(alpha g)."""
    if not alpha > 0.0:
        raise ValueError("norm exponent alpha must be positive")
    return log_density_integral(g, measure, alpha, order) / alpha


def _entropy_from_sums(sums: _ShiftedSums) -> float:
    if sums.total <= 0.0:
        raise DivergenceError("entropy of the zero density")
    # I = e^m S, J = e^m T; Ent = J - I log I = e^m (T - S (m + log S))
    log_i = sums.log_total
    return math.exp(sums.shift) * (sums.weighted - sums.total * log_i)


def entropy(rho, measure: Measure = LEBESGUE, order: int = 12) -> float:
    """Ent(rho) = int rho log rho - (int rho) log(int rho), rho = e^g."""
    if isinstance(rho, RadialProfile):
        extend = _extendable_or_raise(rho, 1.0, measure)
        sums = _accumulate_radial(rho.n, rho.log_at, rho.r, measure, order,
                                  phi_fn=rho.log_at, tail=rho.tail,
                                  scale_for_tail=1.0, extend=extend)
        return _entropy_from_sums(sums)
    if isinstance(rho, GridFunction) and rho.dim == 1:
        sums = _accumulate_grid1d(rho, rho.log_at, measure, order,
                                  phi_fn=rho.log_at)
        return _entropy_from_sums(sums)
    raise TypeError("entropy accepts radial profiles or 1D grids")


def grad_norm_p(f, p: float, measure: Measure = LEBESGUE,
                order: int = 12) -> float:
    """integral of |grad f|^p dm for f = e^phi: integrand |phi'|^p e^(p phi)."""
    if not p > 1.0:
        raise ValueError("gradient norm exponent p must be > 1")

    def log_f(r):
        with np.errstate(divide="ignore"):
            return p * f.log_at(r) + p * np.log(np.abs(f.dlog_at(r)))

    if isinstance(f, RadialProfile):
        extend = _extendable_or_raise(f, p, measure)
        sums = _accumulate_radial(f.n, log_f, f.r, measure, order,
                                  tail=f.tail, scale_for_tail=p, extend=extend)
    elif isinstance(f, GridFunction) and f.dim == 1:
        sums = _accumulate_grid1d(f, log_f, measure, order)
    else:
        raise TypeError("grad_norm_p accepts radial profiles or 1D grids")
    return math.exp(sums.log_total) if np.isfinite(sums.log_total) else 0.0


# ---------------------------------------------------------------------------
# L1 distances between two log-domain radial integrands
# ---------------------------------------------------------------------------

def integrate_abs_difference(n, log_a, log_b, edges, measure=LEBESGUE,
                             order=12, tail=None, extend=True) -> float:
    """integral over R^n of |e^A - e^B| dm with panel splitting at sign
    changes of A - B (the integrand has a kink there)."""
    edges = np.asarray(edges, dtype=float)
    probe = 0.5 * (edges[1:] + edges[:-1])
    with np.errstate(invalid="ignore"):
        diff = log_a(probe) - log_b(probe)
    # nan means both sides vanish; +-inf is a genuine one-sided zero
    sign = np.sign(np.where(np.isnan(diff), 0.0, diff))
    flips = np.nonzero(sign[1:] * sign[:-1] < 0)[0]
    extra = []
    for k in flips:
        lo, hi = probe[k], probe[k + 1]
        for _ in range(80):  # bisection on A - B
            mid = 0.5 * (lo + hi)
            with np.errstate(invalid="ignore"):
                d = float(log_a(np.asarray([mid]))[0] - log_b(np.asarray([mid]))[0])
            if d == 0.0 or math.isnan(d):
                break
            if np.sign(d) == sign[k]:
                lo = mid
            else:
                hi = mid
        extra.append(0.5 * (lo + hi))
    all_edges = np.unique(np.concatenate([edges, np.asarray(extra, float)]))

    def log_absdiff(r):
        a = log_a(r)
        b = log_b(r)
        m = np.maximum(a, b)
        m = np.where(np.isfinite(m), m, -np.inf)
        with np.errstate(invalid="ignore"):
            small = np.exp(np.minimum(a, b) - m)
        small = np.where(np.isfinite(m), small, 0.0)
        with np.errstate(divide="ignore"):
            return m + np.log1p(-small)

    sums = _accumulate_radial(n, log_absdiff, all_edges, measure, order,
                              tail=tail, scale_for_tail=1.0, extend=extend)
    return math.exp(sums.log_total) if np.isfinite(sums.log_total) else 0.0


# ---------------------------------------------------------------------------
# Cartesian quadrature
# ---------------------------------------------------------------------------

def _log_gauss_weight_1d(x, measure):
    if measure.is_gaussian:
        return -0.5 * x * x - 0.5 * LOG_TWO_PI
    return np.zeros_like(np.asarray(x, float))


def _accumulate_grid1d(gf: GridFunction, log_f, measure, order,
                       phi_fn=None, extend=True) -> _ShiftedSums:
    sums = _ShiftedSums()
    pts, wts = _panel_points(gf.xs, order)
    sums.add(log_f(pts) + _log_gauss_weight_1d(pts, measure), wts,
             phi_fn(pts) if phi_fn else None)
    if extend and gf.exact is not None:
        for direction in (+1.0, -1.0):
            edge = gf.xs[-1] if direction > 0 else gf.xs[0]
            step = gf.spacing
            quiet = 0
            for _ in range(_EXTEND_MAX_PANELS):
                nxt = edge + direction * step
                a, b = (edge, nxt) if direction > 0 else (nxt, edge)
                pts, wts = _panel_points(np.linspace(a, b, 3), order)
                logs = log_f(pts) + _log_gauss_weight_1d(pts, measure)
                contrib = sums.add(logs, wts, phi_fn(pts) if phi_fn else None)
                edge = nxt
                step *= 1.3
                if contrib <= _EXTEND_RTOL * max(sums.total, np.finfo(float).tiny):
                    quiet += 1
                    if quiet >= _EXTEND_QUIET:
                        break
                else:
                    quiet = 0
            else:
                raise DivergenceError("1D grid integral did not converge")
    return sums


def log_grid_integral(gf: GridFunction, measure: Measure = LEBESGUE,
                      scale: float = 1.0, order: int = 8,
                      extend: bool = True) -> float:
    """log of integral of e^(scale * g) over the grid's span (1D or 2D).

    1D grids with an exact evaluator are extended beyond the span until
    contributions die out; plain sampled grids are treated as supported
    on their span.
    """
    if gf.dim == 1:
        sums = _accumulate_grid1d(gf, lambda x: scale * gf.log_at(x),
                                  measure, order, extend=extend)
        return sums.log_total
    # 2D tensor panels over the span
    u, w = _gl_unit(order)
    xs, ys = gf.xs, gf.ys
    sums = _ShiftedSums()
    px = (xs[:-1, None] + np.diff(xs)[:, None] * u[None, :]).ravel()
    wx = (np.diff(xs)[:, None] * w[None, :]).ravel()
    py = (ys[:-1, None] + np.diff(ys)[:, None] * u[None, :]).ravel()
    wy = (np.diff(ys)[:, None] * w[None, :]).ravel()
    for i in range(0, len(px), 256):
        sl = slice(i, i + 256)
        gx, gy = np.meshgrid(px[sl], py, indexing="ij")
        logs = scale * gf.log_at(gx.ravel(), gy.ravel())
        if measure.is_gaussian:
            rr = gx.ravel() ** 2 + gy.ravel() ** 2
            logs = logs - 0.5 * rr - LOG_TWO_PI
        wts = np.outer(wx[sl], wy).ravel()
        sums.add(logs, wts)
    return sums.log_total


def log_density_integral(obj, measure: Measure = LEBESGUE, scale: float = 1.0,
                         order: int = 12) -> float:
    """log of integral of e^(scale * g) dm for either representation."""
    if isinstance(obj, RadialProfile):
        return log_radial_density_integral(obj, measure, scale, order)
    if isinstance(obj, GridFunction):
        return log_grid_integral(obj, measure, scale, order)
    raise TypeError(f"unsupported representation {type(obj)!r}")


# ---------------------------------------------------------------------------
# Schwarz rearrangement via the layer-cake representation
# ---------------------------------------------------------------------------

def _superlevel_volume(xs, vals, level, n, radial):
    """Volume of {e^g > e^level} for the piecewise-linear exponent."""
    vol = 0.0
    omega = unit_ball_volume(n)
    for i in range(len(xs) - 1):
        a, b = xs[i], xs[i + 1]
        va, vb = vals[i], vals[i + 1]
        lo, hi = (va, vb) if va <= vb else (vb, va)
        if hi <= level:
            continue
        if lo >= level:
            seg = (a, b)
        else:
            # linear crossing of the level inside the cell
            tcross = (level - va) / (vb - va)
            xc = a + tcross * (b - a)
            seg = (xc, b) if vb > va else (a, xc)
        if radial:
            vol += omega * (seg[1] ** n - seg[0] ** n)
        else:
            vol += seg[1] - seg[0]
    return vol


def schwarz_rearrange(f, num_levels: int = 4096) -> RadialProfile:
    """Symmetric-decreasing rearrangement of a nonnegative density e^g.

    Accepts a RadialProfile or a 1D GridFunction; returns a radial
    profile (nonincreasing in r) equimeasurable with the input's
    piecewise-linear interpolant, built by inverting the distribution
    function on a dense ladder of levels.
    """
    if isinstance(f, RadialProfile):
        xs, vals, n, radial = f.r, f.logvals, f.n, True
        tail = f.tail
    elif isinstance(f, GridFunction) and f.dim == 1:
        xs, vals, n, radial = f.xs, f.logvals, 1, False
        tail = None
    else:
        raise ValueError("rearrangement accepts radial profiles or 1D grids")
    finite = np.isfinite(vals)
    if not np.any(finite):
        raise ValueError("cannot rearrange an identically vanishing density")
    vmax = float(vals[finite].max())
    vmin = float(vals[finite].min())
    # every end of the domain must have died off (or carry a decaying tail)
    edge_vals = [vals[-1]] if radial else [vals[0], vals[-1]]
    for v in edge_vals:
        if tail is None and np.isfinite(v) and v > vmax - 30.0:
            raise DivergenceError("input does not decay; rearrangement undefined")
    levels = np.unique(np.concatenate([
        vals[finite],
        np.linspace(vmin, vmax, num_levels),
    ]))[::-1]  # descending
    omega = unit_ball_volume(n)
    radii = np.array([
        (_superlevel_volume(xs, vals, lv, n, radial) / omega) ** (1.0 / n)
        for lv in levels
    ])
    # radii ascend as levels descend; enforce strict monotonicity
    keep = np.concatenate([[True], np.diff(radii) > 1e-14])
    radii = radii[keep]
    levels = levels[keep]
    if radii[0] > 0.0:
        radii = np.concatenate([[0.0], radii])
        levels = np.concatenate([[vmax], levels])
    if len(radii) < 16:
        extra = np.linspace(0.0, radii[-1], 16)
        merged_r = np.unique(np.concatenate([radii, extra]))
        merged_v = np.interp(merged_r, radii, levels)
        radii, levels = merged_r, merged_v
    out_tail = tail if (radial and tail is not None) else None
    return RadialProfile(n, radii, levels, tail=out_tail)


# ---------------------------------------------------------------------------
# Plain-text import/export
# ---------------------------------------------------------------------------

def save_function(path, obj, p=None):
    """Write a profile/grid to the tabular text format.

    Radial: rows ``r  g(r)``; 1D grid: rows ``x  g(x)``; 2D grid:
    rows ``x  y  g(x,y)``.  Header carries dimension, optional p, and
    the tail descriptor.
    """
    lines = []
    if isinstance(obj, RadialProfile):
        header = f"# n={obj.n}"
        if p is not None:
            header += f" p={p:.17g}"
        if obj.tail is not None:
            header += f" tail={obj.tail.c1:.17g},{obj.tail.c2:.17g},{obj.tail.q:.17g}"
        lines.append(header)
        lines.append("# kind=radial")
        for r, v in zip(obj.r, obj.logvals):
            lines.append(f"{r:.17g} {v:.17g}")
    elif isinstance(obj, GridFunction):
        header = f"# n={obj.dim}"
        if p is not None:
            header += f" p={p:.17g}"
        lines.append(header)
        lines.append("# kind=grid")
        if obj.dim == 1:
            for x, v in zip(obj.xs, obj.logvals):
                lines.append(f"{x:.17g} {v:.17g}")
        else:
            for i, x in enumerate(obj.xs):
                for j, y in enumerate(obj.ys):
                    lines.append(f"{x:.17g} {y:.17g} {obj.logvals[i, j]:.17g}")
    else:
        raise TypeError(f"cannot save object of type {type(obj)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_function(path):
    """Read a profile/grid written by :func:`save_function`.

    Returns ``(object, metadata)`` where metadata holds any ``p`` from
    the header.
    """
    meta = {}
    kind = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" not in token:
                        continue
                    key, val = token.split("=", 1)
                    if key == "n":
                        meta["n"] = int(val)
                    elif key == "p":
                        meta["p"] = float(val)
                    elif key == "kind":
                        kind = val
                    elif key == "tail":
                        c1, c2, q = (float(t) for t in val.split(","))
                        meta["tail"] = TailDecay(c1, c2, q)
                continue
            rows.append([float(t) for t in line.split()])
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError(f"no tabular data found in {path!r}")
    n = meta.get("n", 1)
    if data.shape[1] == 3:
        xs = np.unique(data[:, 0])
        ys = np.unique(data[:, 1])
        vals = np.full((len(xs), len(ys)), -np.inf)
        ix = np.searchsorted(xs, data[:, 0])
        iy = np.searchsorted(ys, data[:, 1])
        vals[ix, iy] = data[:, 2]
        spacing = float(xs[1] - xs[0])
        return GridFunction(2, (xs[0], ys[0]), spacing, vals), meta
    if kind is None:
        kind = "radial" if (data[0, 0] == 0.0 and np.all(data[:, 0] >= 0.0)) else "grid"
    if kind == "radial":
        prof = RadialProfile(n, data[:, 0], data[:, 1], tail=meta.get("tail"))
        return prof, meta
    spacing = float(data[1, 0] - data[0, 0])
    return GridFunction(1, (data[0, 0],), spacing, data[:, 1]), meta
