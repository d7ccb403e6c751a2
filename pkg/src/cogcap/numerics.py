"""Shared numerical kernels: special functions, expectations over fading
power, and monotone root finding.

The fading expectation machinery is the workhorse of the analytic solvers.
For exponentially distributed fading power it uses fixed-order
Gauss-Laguerre quadrature with an adaptive doubling fallback, optionally
splitting the axis at user-supplied breakpoints so that integrands with a
cutoff (power-adaptation policies) keep spectral accuracy.  A log-domain
variant supports moment generating functions whose values underflow for
strict QoS exponents.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special

from .errors import BracketError, ConfigError, QuadratureError

__all__ = [
    "FadingKind",
    "FadingModel",
    "Tolerance",
    "DEFAULT_TOL",
    "reg_lower_gamma",
    "gaussian_q",
    "expect_over_fading",
    "log_expect_exp_over_fading",
    "integrate_finite",
    "find_root_monotone",
]

# Exponential weight exp(-z/s) underflows past this many mean powers.
_EXP_CUTOFF = 745.0
# Inverse-CDF grid size for tabulated fading distributions.
_TAB_GRID = 1 << 14


class FadingKind(enum.Enum):
    RAYLEIGH_POWER = "rayleigh"
    DEGENERATE = "degenerate"
    TABULATED_CDF = "tabulated"


@dataclass(frozen=True)
class Tolerance:
    """Relative/absolute convergence targets plus an iteration budget."""

    rel: float = 1e-8
    abs: float = 1e-12
    max_iter: int = 60

    def __post_init__(self) -> None:
        if not (self.rel > 0 and self.abs > 0):
            raise ConfigError("tolerances must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True, eq=False)
class FadingModel:
    """Distribution of the fading power z = |h|^2.

    ``mean_power`` is E{z}.  For the degenerate model z is identically
    ``mean_power``; for the tabulated model the distribution is given by a
    sampled CDF and ``mean_power`` is derived from the grid.
    """

    kind: FadingKind
    mean_power: float = 1.0
    z_grid: np.ndarray | None = field(default=None, repr=False)
    cdf_grid: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not (np.isfinite(self.mean_power) and self.mean_power > 0):
            raise ConfigError("mean fading power must be positive and finite")
        if self.kind is FadingKind.TABULATED_CDF:
            if self.z_grid is None or self.cdf_grid is None:
                raise ConfigError("tabulated fading requires z_grid and cdf_grid")
            z = np.asarray(self.z_grid, dtype=float)
            c = np.asarray(self.cdf_grid, dtype=float)
            if z.ndim != 1 or z.shape != c.shape or z.size < 2:
                raise ConfigError("tabulated grids must be matching 1-D arrays")
            if z[0] < 0 or np.any(np.diff(z) <= 0):
                raise ConfigError("z_grid must be nonnegative and strictly increasing")
            if np.any(np.diff(c) < 0) or c[0] < 0 or c[-1] > 1 + 1e-12:
                raise ConfigError("cdf_grid must be a nondecreasing CDF in [0, 1]")
            object.__setattr__(self, "z_grid", z)
            object.__setattr__(self, "cdf_grid", np.minimum(c, 1.0))
        elif self.z_grid is not None or self.cdf_grid is not None:
            raise ConfigError("grids are only meaningful for tabulated fading")

    @classmethod
    def rayleigh(cls, mean_power: float = 1.0) -> "FadingModel":
        """Rayleigh fading: z exponential with the given mean."""
        return cls(FadingKind.RAYLEIGH_POWER, mean_power)

    @classmethod
    def degenerate(cls, z0: float) -> "FadingModel":
        """Deterministic channel with z identically z0."""
        return cls(FadingKind.DEGENERATE, z0)

    @classmethod
    def tabulated(cls, z_grid, cdf_grid) -> "FadingModel":
        """Arbitrary distribution given by a sampled CDF; mean is derived."""
        z = np.asarray(z_grid, dtype=float)
        c = np.asarray(cdf_grid, dtype=float)
        probe = cls(FadingKind.TABULATED_CDF, 1.0, z, c)
        mean = float(np.mean(probe.ppf(_midpoint_grid())))
        return cls(FadingKind.TABULATED_CDF, mean, z, c)

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind is FadingKind.RAYLEIGH_POWER:
            out = -np.expm1(-np.maximum(z, 0.0) / self.mean_power)
        elif self.kind is FadingKind.DEGENERATE:
            out = np.where(z >= self.mean_power, 1.0, 0.0)
        else:
            out = np.interp(z, self.z_grid, self.cdf_grid, left=0.0, right=1.0)
        return out if out.ndim else float(out)

    def tail(self, z):
        """P{fading power > z}; complementary CDF."""
        z = np.asarray(z, dtype=float)
        if self.kind is FadingKind.RAYLEIGH_POWER:
            out = np.exp(-np.maximum(z, 0.0) / self.mean_power)
        elif self.kind is FadingKind.DEGENERATE:
            out = np.where(z < self.mean_power, 1.0, 0.0)
        else:
            out = 1.0 - np.interp(z, self.z_grid, self.cdf_grid, left=0.0, right=1.0)
        return out if out.ndim else float(out)

    def ppf(self, u):
        """Quantile function; inverse of the CDF."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u > 1)):
            raise ConfigError("quantile levels must lie in [0, 1]")
        if self.kind is FadingKind.RAYLEIGH_POWER:
            with np.errstate(divide="ignore"):
                out = -self.mean_power * np.log1p(-u)
        elif self.kind is FadingKind.DEGENERATE:
            out = np.full_like(u, self.mean_power)
        else:
            out = np.interp(u, self.cdf_grid, self.z_grid)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind is FadingKind.RAYLEIGH_POWER:
            return rng.exponential(self.mean_power, n)
        if self.kind is FadingKind.DEGENERATE:
            return np.full(n, self.mean_power)
        return self.ppf(rng.random(n))


def _midpoint_grid() -> np.ndarray:
    return (np.arange(_TAB_GRID) + 0.5) / _TAB_GRID


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function with shape a at x.

    Equals the CDF of a unit-scale gamma distribution with shape a;
    nondecreasing in x from 0 to 1.
    """
    if not (np.isfinite(a) and np.isfinite(x)):
        raise ConfigError("arguments must be finite")
    if a <= 0:
        raise ConfigError("shape parameter must be positive")
    if x < 0:
        raise ConfigError("evaluation point must be nonnegative")
    return float(special.gammainc(a, x))


def gaussian_q(x):
    """Upper-tail probability of a standard normal variable."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ConfigError("argument must be finite")
    out = special.ndtr(-arr)
    return out if out.ndim else float(out)


def _eval(g: Callable, z: np.ndarray) -> np.ndarray:
    """Evaluate g on an array of points, tolerating scalar-only callables."""
    try:
        out = np.asarray(g(z), dtype=float)
        if out.shape == z.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(g(zi)) for zi in z], dtype=float)


# numpy's Laguerre weights lose all precision past order ~128, so the
# spectral ladder stops there; harder integrands go to the panel scheme.
_LADDER_ORDERS = (64, 128)


@functools.lru_cache(maxsize=32)
def _laggauss(order: int):
    return np.polynomial.laguerre.laggauss(min(order, max(_LADDER_ORDERS)))


@functools.lru_cache(maxsize=32)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _rayleigh_nodes(sigma: float, breakpoints: tuple, order: int):
    """Quadrature nodes/weights against the exponential density.

    Finite panels between breakpoints use Gauss-Legendre with the density
    folded into the weights; the tail beyond the last breakpoint uses
    shifted Gauss-Laguerre, whose implicit weight matches the exponential
    density exactly.
    """
    pts = [b for b in sorted(breakpoints) if b > 0]
    nodes = []
    weights = []
    xg, wg = _leggauss(order)
    lo = 0.0
    for b in pts:
        if b <= lo:
            continue
        half = 0.5 * (b - lo)
        z = lo + half * (xg + 1.0)
        nodes.append(z)
        weights.append(half * wg * np.exp(-z / sigma) / sigma)
        lo = b
    xl, wl = _laggauss(order)
    nodes.append(lo + sigma * xl)
    weights.append(wl * math.exp(-lo / sigma) if lo > 0 else wl)
    return np.concatenate(nodes), np.concatenate(weights)


def _rayleigh_panels(sigma: float, breakpoints: tuple, order: int):
    """Refined scheme: geometric panels resolve near-singular structure
    above a (possibly very deep) cutoff, then a Laguerre tail."""
    base = min([b for b in breakpoints if b > 0], default=sigma * 2.0**-20)
    base = max(min(base, sigma * 2.0**-20), 5e-324)
    edges = {b for b in breakpoints if 0.0 < b <= _EXP_CUTOFF * sigma}
    b = base
    while b <= 64.0 * sigma:
        edges.add(b)
        b *= 4.0
    edges.update(sigma * 2.0 ** np.arange(0, 7))
    xg, wg = _leggauss(order)
    nodes = []
    weights = []
    prev = 0.0
    for e in sorted(edges):
        half = 0.5 * (e - prev)
        if half <= 0:
            continue
        z = prev + half * (xg + 1.0)
        nodes.append(z)
        weights.append(half * wg * np.exp(-z / sigma) / sigma)
        prev = e
    xl, wl = _laggauss(order)
    nodes.append(prev + sigma * xl)
    weights.append(wl * math.exp(-prev / sigma))
    return np.concatenate(nodes), np.concatenate(weights)


def _converged(a: float, b: float, tol: Tolerance) -> bool:
    return abs(a - b) <= tol.rel * max(abs(a), abs(b)) + tol.abs


def expect_over_fading(
    g: Callable,
    model: FadingModel,
    tol: Tolerance = DEFAULT_TOL,
    breakpoints: Sequence[float] = (),
) -> float:
    """Expectation of g(z) over the fading-power distribution.

    ``breakpoints`` marks locations where g is non-smooth (e.g. a power
    cutoff); the quadrature splits panels there.  Raises QuadratureError
    when the adaptive ladder cannot reach the requested tolerance.
    """
    if model.kind is FadingKind.DEGENERATE:
        return float(g(model.mean_power))
    if model.kind is FadingKind.TABULATED_CDF:
        return float(np.mean(_eval(g, model.ppf(_midpoint_grid()))))

    sigma = model.mean_power
    bps = tuple(float(b) for b in breakpoints if 0.0 < b < np.inf)
    prev = None
    for order in _LADDER_ORDERS:
        z, w = _rayleigh_nodes(sigma, bps, order)
        est = float(np.dot(w, _eval(g, z)))
        if prev is not None and _converged(est, prev, tol):
            return est
        prev = est
    # Spectral ladder disagreed: fall back to geometric panels, doubling
    # the per-panel order until two refinements agree.
    refinements = 0
    prev = None
    order = 16
    while refinements < tol.max_iter and order <= 1024:
        z, w = _rayleigh_panels(sigma, bps, order)
        est = float(np.dot(w, _eval(g, z)))
        if prev is not None and _converged(est, prev, tol):
            return est
        prev = est
        order *= 2
        refinements += 1
    raise QuadratureError(
        f"fading expectation did not converge to rel={tol.rel:g} "
        f"after {refinements} refinements"
    )


def log_expect_exp_over_fading(
    log_g: Callable,
    model: FadingModel,
    tol: Tolerance = DEFAULT_TOL,
    breakpoints: Sequence[float] = (),
) -> float:
    """log E{exp(log_g(z))} evaluated without leaving the log domain.

    Used for moment generating functions whose values underflow at strict
    QoS exponents.  log_g must be vectorized and may return -inf.
    """
    if model.kind is FadingKind.DEGENERATE:
        return float(log_g(model.mean_power))
    if model.kind is FadingKind.TABULATED_CDF:
        vals = _eval(log_g, model.ppf(_midpoint_grid()))
        return float(special.logsumexp(vals) - math.log(vals.size))

    sigma = model.mean_power
    bps = tuple(float(b) for b in breakpoints if 0.0 < b < np.inf)

    def estimate(z: np.ndarray, w: np.ndarray) -> float:
        mask = w > 0.0
        return float(special.logsumexp(np.log(w[mask]) + _eval(log_g, z[mask])))

    prev = None
    for order in _LADDER_ORDERS:
        est = estimate(*_rayleigh_nodes(sigma, bps, order))
        if prev is not None and abs(est - prev) <= tol.rel * 10 + tol.abs:
            return est
        prev = est
    refinements = 0
    prev = None
    order = 16
    while refinements < tol.max_iter and order <= 1024:
        est = estimate(*_rayleigh_panels(sigma, bps, order))
        if prev is not None and abs(est - prev) <= tol.rel * 10 + tol.abs:
            return est
        prev = est
        order *= 2
        refinements += 1
    raise QuadratureError("log-domain fading expectation did not converge")


def integrate_finite(
    h: Callable,
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
    max_panel: float = 25.0,
) -> float:
    """Adaptive fixed-panel Gauss-Legendre integral of a smooth vectorized
    integrand on a finite interval; doubles the per-panel order until two
    successive estimates agree."""
    if hi <= lo:
        return 0.0
    n_panels = max(1, int(math.ceil((hi - lo) / max_panel)))
    edges = np.linspace(lo, hi, n_panels + 1)
    prev = None
    order = 16
    refinements = 0
    while refinements < tol.max_iter and order <= 1024:
        xg, wg = _leggauss(order)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            total += half * float(np.dot(wg, _eval(h, a + half * (xg + 1.0))))
        if prev is not None and _converged(total, prev, tol):
            return total
        prev = total
        order *= 2
        refinements += 1
    raise QuadratureError("finite-interval quadrature did not converge")


def find_root_monotone(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Root of a continuous monotone scalar function.

    The bracket [lo, hi] is widened symmetrically (doubling its width, at
    most ``tol.max_iter`` times) until the endpoint signs differ; a
    bracketed root is then polished by Brent's method.  Raises
    BracketError when no sign change can be found.
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ConfigError("need a finite interval with lo < hi")
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    expansions = 0
    while np.sign(flo) == np.sign(fhi):
        if expansions >= tol.max_iter:
            raise BracketError(
                f"no root in range: no sign change on [{lo:g}, {hi:g}] "
                f"after {expansions} expansions"
            )
        width = hi - lo
        lo, hi = lo - width, hi + width
        flo, fhi = float(f(lo)), float(f(hi))
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        expansions += 1
    root = optimize.brentq(
        f, lo, hi, xtol=tol.abs, rtol=max(tol.rel, 4 * np.finfo(float).eps),
        maxiter=200,
    )
    return float(root)
