"""Monte Carlo validation: frame-level link simulation, empirical
effective capacity, and a constant-arrival queue.

Frames are independent: the primary user occupies the channel with a
fixed prior, the detector output is sampled either from its analytic
error probabilities or from a synthesized sensing-slot waveform, and the
fading power is drawn from the scenario's distribution.  Generation is
chunked with one seed-derived stream per fixed-size chunk, so results
depend only on (seed, config) regardless of how chunks are executed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ScenarioConfig, derive_snrs, outage_thresholds
from .effcap import (
    PowerPolicy,
    Scheme,
    optimize_fixed_rates,
    solve_power_threshold,
)
from .errors import ConfigError
from .sensing import SensingConfig, SensingPerformance, sensing_performance

__all__ = [
    "FrameSample",
    "SimTrace",
    "QueueStats",
    "EmpiricalEffcap",
    "simulate_service",
    "empirical_effcap",
    "simulate_queue",
    "delay_violation_bound",
    "detector_monte_carlo",
    "export_trace_csv",
]

_CHUNK = 1 << 16
# Tail bins with fewer exceedances than this carry no usable slope signal.
_MIN_EXCEEDANCES = 50


@dataclass(frozen=True)
class FrameSample:
    """One simulated frame."""

    busy: bool
    detected_busy: bool
    z: float
    state: int
    service_bits: float


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Columnar record of simulated frames plus run metadata."""

    busy: np.ndarray
    detected_busy: np.ndarray
    z: np.ndarray
    state: np.ndarray
    service_bits: np.ndarray
    cfg: ScenarioConfig
    scheme: Scheme
    seed: int

    def __len__(self) -> int:
        return self.busy.size

    def __getitem__(self, i: int) -> FrameSample:
        return FrameSample(
            busy=bool(self.busy[i]),
            detected_busy=bool(self.detected_busy[i]),
            z=float(self.z[i]),
            state=int(self.state[i]),
            service_bits=float(self.service_bits[i]),
        )

    @property
    def theta(self) -> float:
        return self.cfg.theta

    def state_frequencies(self) -> np.ndarray:
        """Empirical frequency of states 1..8."""
        return np.bincount(self.state, minlength=9)[1:] / max(len(self), 1)


@dataclass(frozen=True)
class EmpiricalEffcap:
    """Empirical effective capacity with a jackknife confidence interval."""

    value: float
    ci_low: float
    ci_high: float
    std_err: float
    mgf_hat: float
    n_frames: int


@dataclass(frozen=True, eq=False)
class QueueStats:
    """Queue-length trajectory statistics under constant arrivals."""

    samples: np.ndarray
    tail_exponent_hat: float
    mean_service: float
    mgf_hat: float
    arrival_rate: float
    unstable: bool


def _resolve_perf(cfg: ScenarioConfig, perf) -> SensingPerformance:
    if isinstance(perf, SensingPerformance):
        return perf
    return sensing_performance(cfg.sensing, float(perf))


def _chunk_seeds(seed: int, n_chunks: int):
    return np.random.SeedSequence(seed).spawn(n_chunks)


def _waveform_statistic(rng: np.random.Generator, var: np.ndarray, nb: int) -> np.ndarray:
    """Average power of nb synthesized complex samples per frame."""
    acc = np.zeros(var.size)
    for _ in range(nb):
        g1 = rng.standard_normal(var.size)
        g2 = rng.standard_normal(var.size)
        acc += g1 * g1 + g2 * g2
    return acc * (var / (2.0 * nb))


def simulate_service(
    cfg: ScenarioConfig,
    perf,
    scheme: Scheme = Scheme.FIXED_RATE_FIXED_POWER,
    n_frames: int = 100_000,
    seed: int = 0,
    *,
    r1: float | None = None,
    r2: float | None = None,
    waveform: bool = False,
) -> SimTrace:
    """Simulate independent frames of the cognitive link.

    ``perf`` is either a SensingPerformance or a bare detection threshold.
    By default detection outcomes are sampled from (P_f, P_d); with
    ``waveform=True`` each frame synthesizes its sensing samples and
    applies the energy detector at the threshold carried by ``perf``.
    Fixed-rate runs optimize the rates first unless both are supplied.
    """
    if n_frames < 1:
        raise ConfigError("need at least one frame")
    perf = _resolve_perf(cfg, perf)
    snrs = derive_snrs(cfg)
    dt = cfg.data_time
    ln2 = math.log(2.0)

    if scheme is Scheme.FIXED_RATE_FIXED_POWER:
        if r1 is None or r2 is None:
            res = optimize_fixed_rates(cfg, perf)
            r1 = res.r1_opt if r1 is None else r1
            r2 = res.r2_opt if r2 is None else r2
        alphas = outage_thresholds(cfg, r1, r2)
    pol1 = pol2 = None
    if scheme is Scheme.VAR_RATE_VAR_POWER:
        pol1 = solve_power_threshold(
            cfg.theta, snrs.snr1, cfg.fading,
            t_frame=cfg.t_frame, n_sense=cfg.n_sense, bandwidth=cfg.bandwidth)
        pol2 = solve_power_threshold(
            cfg.theta, snrs.snr4, cfg.fading,
            t_frame=cfg.t_frame, n_sense=cfg.n_sense, bandwidth=cfg.bandwidth)

    busy = np.empty(n_frames, dtype=bool)
    detected = np.empty(n_frames, dtype=bool)
    z = np.empty(n_frames, dtype=float)
    nb = cfg.sensing.nb if waveform else 0

    n_chunks = (n_frames + _CHUNK - 1) // _CHUNK
    for k, child in enumerate(_chunk_seeds(seed, n_chunks)):
        rng = np.random.default_rng(child)
        s = k * _CHUNK
        e = min(s + _CHUNK, n_frames)
        m = e - s
        cb = rng.random(m) < cfg.rho
        cz = cfg.fading.sample(rng, m)
        if waveform:
            var = np.where(cb, cfg.noise_var + cfg.primary_var, cfg.noise_var)
            stat = _waveform_statistic(rng, var, nb)
            cd = stat > perf.lam
        else:
            u = rng.random(m)
            cd = np.where(cb, u < perf.p_d, u < perf.p_f)
        busy[s:e] = cb
        detected[s:e] = cd
        z[s:e] = cz

    state = np.empty(n_frames, dtype=np.uint8)
    service = np.zeros(n_frames, dtype=float)

    if scheme is Scheme.FIXED_RATE_FIXED_POWER:
        scenario_alpha = np.select(
            [busy & detected, busy & ~detected, ~busy & detected],
            [alphas.alpha1, alphas.alpha2, alphas.alpha3],
            default=alphas.alpha4,
        )
        on = z > scenario_alpha
        base = np.select(
            [busy & detected, busy & ~detected, ~busy & detected],
            [1, 3, 5],
            default=7,
        ).astype(np.uint8)
        state[:] = np.where(on, base, base + 1)
        rate = np.where(detected, r1, r2)
        service[:] = np.where(on, rate * dt, 0.0)
    else:
        state[:] = np.select(
            [busy & detected, busy & ~detected, ~busy & detected],
            [1, 4, 5],
            default=7,
        ).astype(np.uint8)
        on = state != 4
        if scheme is Scheme.VAR_RATE_FIXED_POWER:
            snr = np.where(detected, snrs.snr1, snrs.snr4)
            service[on] = (cfg.bandwidth / ln2) * np.log1p(z[on] * snr[on]) * dt
        elif scheme is Scheme.VAR_RATE_VAR_POWER:
            lg1, lg2 = math.log(pol1.gamma), math.log(pol2.gamma)
            scale = cfg.bandwidth / ((pol1.a + 1.0) * ln2) * dt
            safe = np.maximum(z, 5e-324)
            lz = np.log(safe)
            srv = np.where(
                detected,
                np.where(z > pol1.gamma, scale * (lz - lg1), 0.0),
                np.where(z > pol2.gamma, scale * (lz - lg2), 0.0),
            )
            service[on] = srv[on]
        else:
            raise ConfigError(f"unknown scheme: {scheme!r}")

    return SimTrace(
        busy=busy, detected_busy=detected, z=z, state=state,
        service_bits=service, cfg=cfg, scheme=scheme, seed=seed,
    )


def empirical_effcap(trace: SimTrace, theta: float | None = None) -> EmpiricalEffcap:
    """Effective capacity estimated from the empirical service MGF.

    Uses the i.i.d. frame structure: the log-MGF of the accumulated
    service is the per-frame log-MGF, estimated by the sample mean of
    exp(-theta * service).  The confidence interval is a leave-one-out
    jackknife at the 95% level.
    """
    n = len(trace)
    if n < 10_000:
        raise ConfigError("need at least 1e4 frames for a stable estimate")
    theta = trace.theta if theta is None else float(theta)
    if theta <= 0:
        raise ConfigError("QoS exponent must be positive")
    tb = trace.cfg.t_frame * trace.cfg.bandwidth
    w = np.exp(-theta * trace.service_bits)
    m = float(w.mean())
    value = -math.log(m) / (theta * tb)
    loo = (n * m - w) / (n - 1.0)
    if np.any(loo <= 0.0):
        return EmpiricalEffcap(value, -np.inf, np.inf, np.inf, m, n)
    r_loo = -np.log(loo) / (theta * tb)
    se = math.sqrt((n - 1.0) / n * float(np.sum((r_loo - r_loo.mean()) ** 2)))
    return EmpiricalEffcap(
        value=value,
        ci_low=value - 1.96 * se,
        ci_high=value + 1.96 * se,
        std_err=se,
        mgf_hat=m,
        n_frames=n,
    )


def _fit_tail_exponent(q: np.ndarray) -> float:
    """Least-squares slope of the log tail probability over a grid spanning
    the 50th to 99.9th percentiles; bins with too few exceedances are
    dropped."""
    q_sorted = np.sort(q)
    n = q.size
    lo, hi = np.percentile(q_sorted, [50.0, 99.9])
    if not (hi > lo):
        return math.nan
    grid = np.linspace(lo, hi, 30)
    counts = n - np.searchsorted(q_sorted, grid, side="left")
    keep = counts >= _MIN_EXCEEDANCES
    if keep.sum() < 2 or np.unique(counts[keep]).size < 2:
        return math.nan
    slope = np.polyfit(grid[keep], np.log(counts[keep] / n), 1)[0]
    return -float(slope) if slope < 0 else math.nan


def simulate_queue(arrival_rate: float, trace: SimTrace) -> QueueStats:
    """Drive a constant-arrival queue with the simulated service.

    The queue follows the standard reflected random walk from an empty
    start.  An arrival rate at or above the mean service rate yields a
    flagged (unstable) result rather than an error.
    """
    if arrival_rate < 0:
        raise ConfigError("arrival rate cannot be negative")
    per_frame = arrival_rate * trace.cfg.t_frame
    increments = per_frame - trace.service_bits
    walk = np.concatenate(([0.0], np.cumsum(increments)))
    q = (walk - np.minimum.accumulate(walk))[1:]
    mean_service = float(trace.service_bits.mean())
    unstable = per_frame >= mean_service
    theta = trace.theta
    mgf_hat = float(np.exp(-theta * trace.service_bits).mean())
    if unstable or not np.any(q > 0):
        tail_hat = math.nan
    else:
        tail_hat = _fit_tail_exponent(q)
    return QueueStats(
        samples=q,
        tail_exponent_hat=tail_hat,
        mean_service=mean_service,
        mgf_hat=mgf_hat,
        arrival_rate=float(arrival_rate),
        unstable=bool(unstable),
    )


def delay_violation_bound(
    theta: float, arrival_rate: float, d_max: float, c: float = 1.0
) -> float:
    """Upper bound on the steady-state delay violation probability for a
    constant-rate source under the exponential queue-tail model.

    ``c`` is the positive constant of the square-root queue/delay link;
    it defaults to 1 and is an explicit modeling choice.
    """
    if theta <= 0 or arrival_rate <= 0 or c <= 0:
        raise ConfigError("theta, arrival_rate, and c must be positive")
    if d_max < 0:
        raise ConfigError("delay target cannot be negative")
    return c * math.exp(-theta * arrival_rate * d_max / 2.0)


def detector_monte_carlo(
    cfg: SensingConfig,
    thresholds,
    n_trials: int,
    seed: int = 0,
):
    """Empirical false-alarm and detection rates from synthesized
    sensing-slot waveforms, evaluated on a threshold grid.

    Returns (p_f_hat, p_d_hat) arrays matching the threshold grid.
    """
    thresholds = np.asarray(thresholds, dtype=float)
    if n_trials < 1:
        raise ConfigError("need at least one trial")
    nb = cfg.nb
    ss = np.random.SeedSequence(seed).spawn(2)
    stats = []
    for hyp, child in enumerate(ss):
        rng = np.random.default_rng(child)
        var = cfg.noise_var + (cfg.primary_var if hyp else 0.0)
        acc = np.zeros(n_trials)
        for _ in range(nb):
            g1 = rng.standard_normal(n_trials)
            g2 = rng.standard_normal(n_trials)
            acc += g1 * g1 + g2 * g2
        stats.append(acc * (var / (2.0 * nb)))
    y0, y1 = stats
    p_f_hat = np.array([(y0 > lam).mean() for lam in thresholds])
    p_d_hat = np.array([(y1 > lam).mean() for lam in thresholds])
    return p_f_hat, p_d_hat


def export_trace_csv(trace: SimTrace, path, queue: QueueStats | None = None) -> None:
    """Write the per-frame trace as CSV.

    Columns: frame_index, busy, detected_busy, z, state, service_bits,
    queue_bits.  Without a queue the queue column is zero.
    """
    n = len(trace)
    qbits = queue.samples if queue is not None else np.zeros(n)
    if qbits.size != n:
        raise ConfigError("queue sample count does not match the trace")
    data = np.column_stack([
        np.arange(n),
        trace.busy.astype(int),
        trace.detected_busy.astype(int),
        trace.z,
        trace.state,
        trace.service_bits,
        qbits,
    ])
    header = "frame_index,busy,detected_busy,z,state,service_bits,queue_bits"
    np.savetxt(
        path, data, delimiter=",", header=header, comments="",
        fmt=["%d", "%d", "%d", "%.12g", "%d", "%.12g", "%.12g"],
    )
