"""Effective-capacity solvers for the three transmission schemes.

The effective capacity is the largest constant arrival rate the service
process supports under an exponential queue-tail constraint.  For fixed
rates it reduces to a separable two-variable maximization; with rate
adaptation it needs expectations of the per-frame service MGF over
fading; with rate and power adaptation it additionally requires the
cutoff thresholds of the optimal power policies, found from the average
power constraint by monotone root finding.

All log-MGF evaluation routes through expm1/log1p so the loose-QoS limit
stays accurate, with a log-domain fallback for strict exponents where the
MGF underflows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import ScenarioConfig, derive_snrs, outage_threshold, tail_prob
from .errors import BracketError, ConfigError, ConvergenceError
from .numerics import (
    DEFAULT_TOL,
    FadingKind,
    FadingModel,
    Tolerance,
    expect_over_fading,
    find_root_monotone,
    integrate_finite,
    log_expect_exp_over_fading,
)
from .sensing import SensingPerformance
from .states import transition_probs

__all__ = [
    "Scheme",
    "EffCapResult",
    "PowerPolicy",
    "effcap_fixed_value",
    "optimize_fixed_rates",
    "effcap_var_rate_fixed_power",
    "eval_power_policy",
    "solve_power_threshold",
    "effcap_var_power",
    "effective_capacity",
]

# Below this QoS exponent the log-MGF is evaluated by its first-order
# series, i.e. the mean-service-rate limit.
THETA_SERIES = 1e-8
# Switch from log1p to log-domain summation once 1 + delta drops below this.
_LOG_SWITCH = 0.5
# Relative width target of the golden-section rate search.
RATE_RTOL = 1e-9
# Smallest representable log-cutoff for power policies.
_W_MIN = -736.0

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Scheme(enum.Enum):
    FIXED_RATE_FIXED_POWER = "fixed"
    VAR_RATE_FIXED_POWER = "var_rate"
    VAR_RATE_VAR_POWER = "var_power"

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        key = str(text).strip().lower().replace("-", "_")
        for member in cls:
            if key == member.value or key == member.name.lower():
                return member
        aliases = {
            "fixed_rate_fixed_power": cls.FIXED_RATE_FIXED_POWER,
            "var_rate_fixed_power": cls.VAR_RATE_FIXED_POWER,
            "var_rate_var_power": cls.VAR_RATE_VAR_POWER,
            "varrate": cls.VAR_RATE_FIXED_POWER,
            "varpower": cls.VAR_RATE_VAR_POWER,
        }
        if key in aliases:
            return aliases[key]
        raise ConfigError(f"unknown scheme: {text!r}")


@dataclass(frozen=True)
class EffCapResult:
    """Effective capacity plus the maximizing decision variables."""

    r_e: float
    log_mgf: float
    scheme: Scheme
    r1_opt: float | None = None
    r2_opt: float | None = None
    gamma1: float | None = None
    gamma2: float | None = None
    converged: bool = True


@dataclass(frozen=True)
class PowerPolicy:
    """Cutoff power-adaptation policy for one detected channel state.

    Below the fading cutoff ``gamma`` the transmitter stays silent; above
    it the power follows a tilted inversion whose exponent ``a`` encodes
    the QoS constraint.  ``snr`` is the average SNR the policy scales
    against.
    """

    gamma: float
    a: float
    snr: float

    def __post_init__(self) -> None:
        if not (self.gamma > 0 and np.isfinite(self.gamma)):
            raise ConfigError("cutoff must be positive and finite")
        if not (self.a > 0 and np.isfinite(self.a)):
            raise ConfigError("exponent must be positive")
        if not (self.snr > 0):
            raise ConfigError("SNR must be positive")


def _qos_exponent(theta: float, t_frame: float, n_sense: float, bandwidth: float) -> float:
    return (t_frame - n_sense) * bandwidth * theta / math.log(2.0)


def _check_inputs(cfg: ScenarioConfig, perf: SensingPerformance) -> None:
    if not isinstance(perf, SensingPerformance):
        raise ConfigError("need a SensingPerformance instance")
    if cfg.theta <= 0:
        raise ConfigError("QoS exponent must be positive")
    if cfg.n_sense >= cfg.t_frame:
        raise ConfigError("sensing slot consumes the whole frame")


def effcap_fixed_value(
    cfg: ScenarioConfig,
    perf: SensingPerformance,
    r1: float,
    r2: float,
) -> float:
    """Normalized effective capacity in bits/s/Hz at the given fixed rates
    (no maximization)."""
    _check_inputs(cfg, perf)
    sm = transition_probs(cfg, perf, r1, r2)
    theta = cfg.theta
    tb = cfg.t_frame * cfg.bandwidth
    if theta < THETA_SERIES:
        return sm.mean_service / tb
    delta = float(np.dot(sm.p, np.expm1(-theta * sm.service_bits)))
    if 1.0 + delta >= _LOG_SWITCH:
        log_j = math.log1p(delta)
    else:
        mask = sm.p > 0
        log_j = float(
            logsumexp(np.log(sm.p[mask]) - theta * sm.service_bits[mask])
        )
    return -log_j / (theta * tb)


def _golden_min(f, lo: float, hi: float, coarse: int = 200):
    """Deterministic scalar minimizer: coarse grid seed, then
    golden-section.  Ties break toward the smaller abscissa."""
    if hi <= lo:
        return lo, float(f(np.asarray([lo]))[0])
    grid = np.linspace(lo, hi, coarse)
    vals = np.asarray(f(grid), dtype=float)
    i = int(np.argmin(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, coarse - 1)]
    tol = RATE_RTOL * (hi - lo) + 1e-300
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc = float(f(np.asarray([c]))[0])
    fd = float(f(np.asarray([d]))[0])
    for _ in range(300):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = float(f(np.asarray([c]))[0])
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = float(f(np.asarray([d]))[0])
    x = 0.5 * (a + b)
    v = float(f(np.asarray([x]))[0])
    if best_v < v or (best_v == v and best_x < x):
        return best_x, best_v
    return x, v


def _axis_rate_bound(cfg: ScenarioConfig, snr_hi: float) -> float:
    z_hi = cfg.fading.ppf(0.999)
    if z_hi <= 0 or snr_hi <= 0:
        return 0.0
    return cfg.bandwidth * math.log2(1.0 + snr_hi * z_hi)


def optimize_fixed_rates(cfg: ScenarioConfig, perf: SensingPerformance) -> EffCapResult:
    """Maximize the fixed-rate effective capacity over both rates.

    The objective splits into independent terms for the detected-busy
    rate (ON weight from correct detection plus false alarm) and the
    detected-idle rate (miss plus correct idle), so two 1-D searches
    solve the joint problem.
    """
    _check_inputs(cfg, perf)
    snrs = derive_snrs(cfg)
    theta = cfg.theta
    beta = theta * cfg.data_time
    fading = cfg.fading
    bw = cfg.bandwidth

    def make_objective(w_a, snr_a, w_b, snr_b):
        def weight(r):
            t = 0.0
            if w_a > 0:
                t = t + w_a * tail_prob(fading, outage_threshold(r, snr_a, bw))
            if w_b > 0:
                t = t + w_b * tail_prob(fading, outage_threshold(r, snr_b, bw))
            return t

        if theta < THETA_SERIES:
            return lambda r: -(np.asarray(weight(r)) * np.asarray(r) * cfg.data_time)
        return lambda r: np.asarray(weight(r)) * np.expm1(-beta * np.asarray(r))

    rho, pd, pf = cfg.rho, perf.p_d, perf.p_f
    obj1 = make_objective(rho * pd, snrs.snr1, (1 - rho) * pf, snrs.snr3)
    obj2 = make_objective(rho * (1 - pd), snrs.snr2, (1 - rho) * (1 - pf), snrs.snr4)
    r1_hi = _axis_rate_bound(cfg, max(snrs.snr1, snrs.snr3))
    r2_hi = _axis_rate_bound(cfg, max(snrs.snr2, snrs.snr4))
    r1_opt, _ = _golden_min(obj1, 0.0, r1_hi)
    r2_opt, _ = _golden_min(obj2, 0.0, r2_hi)
    r_e = effcap_fixed_value(cfg, perf, r1_opt, r2_opt)
    return EffCapResult(
        r_e=r_e,
        log_mgf=-r_e * cfg.t_frame * cfg.bandwidth,
        scheme=Scheme.FIXED_RATE_FIXED_POWER,
        r1_opt=r1_opt,
        r2_opt=r2_opt,
    )


def _coefficients(cfg: ScenarioConfig, perf: SensingPerformance):
    """ON weights of the adaptive-transmission state model: detected busy
    (any true state), correct idle, and the missed-detection outage."""
    rho, pd, pf = cfg.rho, perf.p_d, perf.p_f
    c_busy = rho * pd + (1.0 - rho) * pf
    c_idle = (1.0 - rho) * (1.0 - pf)
    c_off = rho * (1.0 - pd)
    return c_busy, c_idle, c_off


def _assemble_adaptive(cfg, c_busy, c_idle, c_off, d1, d2, log_e1, log_e2):
    """Combine per-branch MGF terms into -log MGF / (theta T B).

    d1/d2 are E{exp(-theta s)} - 1 for the two adapted-rate branches;
    log_e1/log_e2 are callables producing the log-domain values when the
    linear combination loses precision.
    """
    theta = cfg.theta
    tb = cfg.t_frame * cfg.bandwidth
    delta = c_busy * d1 + c_idle * d2
    if 1.0 + delta >= _LOG_SWITCH:
        log_j = math.log1p(delta)
    else:
        terms = []
        if c_busy > 0:
            terms.append(math.log(c_busy) + log_e1())
        if c_idle > 0:
            terms.append(math.log(c_idle) + log_e2())
        if c_off > 0:
            terms.append(math.log(c_off))
        log_j = float(logsumexp(terms))
    return -log_j / (theta * tb), log_j / theta


def effcap_var_rate_fixed_power(
    cfg: ScenarioConfig, perf: SensingPerformance, tol: Tolerance = DEFAULT_TOL
) -> EffCapResult:
    """Effective capacity with the rate tracking instantaneous capacity at
    constant power.

    Detected busy transmits at the capacity implied by the busy-state SNR;
    detected idle uses the idle-state SNR.  A missed detection leaves the
    idle-rate transmission in outage.
    """
    _check_inputs(cfg, perf)
    snrs = derive_snrs(cfg)
    c_busy, c_idle, c_off = _coefficients(cfg, perf)
    theta = cfg.theta
    a = _qos_exponent(theta, cfg.t_frame, cfg.n_sense, cfg.bandwidth)
    ln2 = math.log(2.0)

    if theta < THETA_SERIES:
        mean1 = expect_over_fading(lambda z: np.log1p(z * snrs.snr1), cfg.fading, tol)
        mean2 = expect_over_fading(lambda z: np.log1p(z * snrs.snr4), cfg.fading, tol)
        rate = (c_busy * mean1 + c_idle * mean2) * cfg.bandwidth / ln2
        r_e = rate * cfg.data_time / (cfg.t_frame * cfg.bandwidth)
        return EffCapResult(
            r_e=r_e,
            log_mgf=-r_e * cfg.t_frame * cfg.bandwidth,
            scheme=Scheme.VAR_RATE_FIXED_POWER,
        )

    d1 = expect_over_fading(lambda z: np.expm1(-a * np.log1p(z * snrs.snr1)), cfg.fading, tol)
    d2 = expect_over_fading(lambda z: np.expm1(-a * np.log1p(z * snrs.snr4)), cfg.fading, tol)
    r_e, log_mgf = _assemble_adaptive(
        cfg, c_busy, c_idle, c_off, d1, d2,
        lambda: log_expect_exp_over_fading(
            lambda z: -a * np.log1p(z * snrs.snr1), cfg.fading, tol),
        lambda: log_expect_exp_over_fading(
            lambda z: -a * np.log1p(z * snrs.snr4), cfg.fading, tol),
    )
    return EffCapResult(r_e=r_e, log_mgf=log_mgf, scheme=Scheme.VAR_RATE_FIXED_POWER)


def eval_power_policy(pol: PowerPolicy, z):
    """Normalized transmit power at fading power z; zero below the cutoff."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ConfigError("fading power cannot be negative")
    mask = z > pol.gamma
    safe = np.where(mask, z, 2.0 * pol.gamma)
    log_z = np.log(safe)
    log_gamma = math.log(pol.gamma)
    peak = np.exp((-log_gamma - pol.a * log_z) / (pol.a + 1.0))
    mu = (peak - 1.0 / safe) / pol.snr
    out = np.where(mask, mu, 0.0)
    return out if out.ndim else float(out)


def _mean_policy_power(
    log_gamma: float, a: float, snr: float, fading: FadingModel, tol: Tolerance
) -> float:
    """Average normalized power of the cutoff policy.

    For exponential fading the integral runs in log-fading-power
    coordinates, where the policy stays bounded even for cutoffs far below
    the representable reciprocal range; other models evaluate the policy
    directly.
    """
    if fading.kind is FadingKind.RAYLEIGH_POWER:
        sigma = fading.mean_power
        u_max = math.log(745.0 * sigma) - log_gamma
        if u_max <= 0.0:
            return 0.0

        def h(u):
            u = np.asarray(u, dtype=float)
            return np.expm1(u / (a + 1.0)) * np.exp(
                np.exp(log_gamma + u) / -sigma) / sigma

        return integrate_finite(h, 0.0, u_max, tol) / snr
    pol = PowerPolicy(gamma=math.exp(log_gamma), a=a, snr=snr)
    return expect_over_fading(
        lambda z: eval_power_policy(pol, z), fading, tol, breakpoints=(pol.gamma,)
    )


def solve_power_threshold(
    theta: float,
    snr: float,
    fading: FadingModel,
    tol: Tolerance = DEFAULT_TOL,
    *,
    t_frame: float,
    n_sense: float,
    bandwidth: float,
) -> PowerPolicy:
    """Cutoff threshold making the policy meet its average power budget.

    The mean normalized power is continuous and strictly decreasing in the
    cutoff, so the budget equation has a unique root; it is bracketed in
    log-cutoff space (expanding outward when the default range misses) and
    polished by monotone root finding.
    """
    if not (theta > 0 and np.isfinite(theta)):
        raise ConfigError("QoS exponent must be positive")
    if not (snr > 0 and np.isfinite(snr)):
        raise ConfigError("SNR must be positive")
    if not (0.0 < n_sense < t_frame):
        raise ConfigError("need 0 < sensing duration < frame duration")
    a = _qos_exponent(theta, t_frame, n_sense, bandwidth)

    def h(w: float) -> float:
        return _mean_policy_power(w, a, snr, fading, tol) - 1.0

    sigma = fading.mean_power
    w_lo = math.log(1e-8 * sigma)
    w_hi = math.log(1e3 * sigma)
    f_lo, f_hi = h(w_lo), h(w_hi)
    expansions = 0
    while np.sign(f_lo) == np.sign(f_hi):
        if expansions >= tol.max_iter or (w_lo <= _W_MIN and f_lo < 0):
            raise BracketError(
                "no power-budget root in range: cutoff search exhausted"
            )
        width = w_hi - w_lo
        if f_lo < 0:
            w_lo = max(w_lo - width, _W_MIN)
            f_lo = h(w_lo)
        else:
            w_hi = w_hi + width
            f_hi = h(w_hi)
        expansions += 1
    w = find_root_monotone(h, w_lo, w_hi, tol)
    gamma = math.exp(w)
    residual = h(w)
    if not np.isfinite(residual) or abs(residual) > 1e-6:
        raise ConvergenceError(
            f"power budget residual {residual:.3e} exceeds 1e-6 at cutoff {gamma:g}"
        )
    return PowerPolicy(gamma=gamma, a=a, snr=snr)


def _policy_log_mgf_decay(pol: PowerPolicy):
    """log of exp(-theta * service) under the policy's adapted rate."""
    frac = pol.a / (pol.a + 1.0)
    log_gamma = math.log(pol.gamma)

    def log_g(z):
        z = np.asarray(z, dtype=float)
        safe = np.maximum(z, 5e-324)
        return np.where(z > pol.gamma, -frac * (np.log(safe) - log_gamma), 0.0)

    return log_g


def effcap_var_power(
    cfg: ScenarioConfig, perf: SensingPerformance, tol: Tolerance = DEFAULT_TOL
) -> EffCapResult:
    """Effective capacity with jointly adapted rate and power.

    The detected-busy and detected-idle branches each use the cutoff
    policy meeting their own power budget; the detected-busy branch
    allocates against the interference-limited SNR, the detected-idle
    branch against the clean-channel SNR.
    """
    _check_inputs(cfg, perf)
    snrs = derive_snrs(cfg)
    c_busy, c_idle, c_off = _coefficients(cfg, perf)
    theta = cfg.theta
    pol1 = solve_power_threshold(
        theta, snrs.snr1, cfg.fading, tol,
        t_frame=cfg.t_frame, n_sense=cfg.n_sense, bandwidth=cfg.bandwidth,
    )
    pol2 = solve_power_threshold(
        theta, snrs.snr4, cfg.fading, tol,
        t_frame=cfg.t_frame, n_sense=cfg.n_sense, bandwidth=cfg.bandwidth,
    )
    a = pol1.a
    ln2 = math.log(2.0)

    if theta < THETA_SERIES:
        def mean_rate(pol: PowerPolicy) -> float:
            log_gamma = math.log(pol.gamma)

            def g(z):
                z = np.asarray(z, dtype=float)
                safe = np.maximum(z, 5e-324)
                return np.where(z > pol.gamma, np.log(safe) - log_gamma, 0.0)

            scale = cfg.bandwidth / ((pol.a + 1.0) * ln2)
            return scale * expect_over_fading(g, cfg.fading, tol, breakpoints=(pol.gamma,))

        rate = c_busy * mean_rate(pol1) + c_idle * mean_rate(pol2)
        r_e = rate * cfg.data_time / (cfg.t_frame * cfg.bandwidth)
        return EffCapResult(
            r_e=r_e,
            log_mgf=-r_e * cfg.t_frame * cfg.bandwidth,
            scheme=Scheme.VAR_RATE_VAR_POWER,
            gamma1=pol1.gamma,
            gamma2=pol2.gamma,
        )

    log_g1 = _policy_log_mgf_decay(pol1)
    log_g2 = _policy_log_mgf_decay(pol2)
    d1 = expect_over_fading(
        lambda z: np.expm1(log_g1(z)), cfg.fading, tol, breakpoints=(pol1.gamma,))
    d2 = expect_over_fading(
        lambda z: np.expm1(log_g2(z)), cfg.fading, tol, breakpoints=(pol2.gamma,))
    r_e, log_mgf = _assemble_adaptive(
        cfg, c_busy, c_idle, c_off, d1, d2,
        lambda: log_expect_exp_over_fading(
            log_g1, cfg.fading, tol, breakpoints=(pol1.gamma,)),
        lambda: log_expect_exp_over_fading(
            log_g2, cfg.fading, tol, breakpoints=(pol2.gamma,)),
    )
    return EffCapResult(
        r_e=r_e,
        log_mgf=log_mgf,
        scheme=Scheme.VAR_RATE_VAR_POWER,
        gamma1=pol1.gamma,
        gamma2=pol2.gamma,
    )


def effective_capacity(
    cfg: ScenarioConfig, perf: SensingPerformance, scheme: Scheme
) -> EffCapResult:
    """Dispatch to the solver for the requested transmission scheme."""
    if scheme is Scheme.FIXED_RATE_FIXED_POWER:
        return optimize_fixed_rates(cfg, perf)
    if scheme is Scheme.VAR_RATE_FIXED_POWER:
        return effcap_var_rate_fixed_power(cfg, perf)
    if scheme is Scheme.VAR_RATE_VAR_POWER:
        return effcap_var_power(cfg, perf)
    raise ConfigError(f"unknown scheme: {scheme!r}")
