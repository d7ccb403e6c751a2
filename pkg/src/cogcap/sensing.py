"""Energy-detector operating characteristics.

The detector averages the power of the complex samples collected during
the sensing slot and compares it against a threshold.  With Gaussian
noise and a Gaussian primary signal the averaged statistic is gamma
distributed under both hypotheses, which gives closed-form false-alarm
and detection probabilities; a normal approximation is provided for
validation at large sample counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .numerics import gaussian_q, reg_lower_gamma

__all__ = [
    "SensingConfig",
    "SensingPerformance",
    "false_alarm_prob",
    "detection_prob",
    "sensing_performance",
    "sensing_performance_gaussian",
]

# Sample counts beyond this overflow the usefulness of the gamma-CDF shape
# parameter; reject rather than silently lose precision.
_MAX_SAMPLES = 10_000_000


@dataclass(frozen=True)
class SensingConfig:
    """Sensing-slot parameters.

    ``n_sense`` seconds at bandwidth ``bandwidth`` yield ``nb`` complex
    samples; ``noise_var`` and ``primary_var`` are the per-sample noise
    and primary-signal powers at the secondary receiver.
    """

    n_sense: float
    bandwidth: float
    noise_var: float = 1.0
    primary_var: float = 0.0

    def __post_init__(self) -> None:
        if not (self.n_sense > 0 and np.isfinite(self.n_sense)):
            raise ConfigError("sensing duration must be positive")
        if not (self.bandwidth > 0 and np.isfinite(self.bandwidth)):
            raise ConfigError("bandwidth must be positive")
        if self.n_sense * self.bandwidth < 1.0:
            raise ConfigError("sensing slot must span at least one sample")
        if not (self.noise_var > 0):
            raise ConfigError("noise variance must be positive")
        if self.primary_var < 0:
            raise ConfigError("primary signal variance cannot be negative")

    @property
    def nb(self) -> int:
        """Number of complex samples in the sensing slot."""
        n = int(round(self.n_sense * self.bandwidth))
        return max(n, 1)


@dataclass(frozen=True)
class SensingPerformance:
    """Detection threshold with its resulting error probabilities."""

    lam: float
    p_f: float
    p_d: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_f <= 1.0 and 0.0 <= self.p_d <= 1.0):
            raise ConfigError("probabilities must lie in [0, 1]")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ConfigError("threshold must be nonnegative")

    @classmethod
    def ideal(cls) -> "SensingPerformance":
        """Error-free sensing: no false alarms, certain detection."""
        return cls(lam=0.0, p_f=0.0, p_d=1.0)


def _check_threshold(cfg: SensingConfig, lam: float) -> int:
    if not (np.isfinite(lam) and lam >= 0):
        raise ConfigError("threshold must be nonnegative and finite")
    nb = cfg.nb
    if nb > _MAX_SAMPLES:
        raise ConfigError(f"sample count {nb} exceeds supported maximum {_MAX_SAMPLES}")
    return nb


def false_alarm_prob(cfg: SensingConfig, lam: float) -> float:
    """Probability of declaring the channel busy when it is idle."""
    nb = _check_threshold(cfg, lam)
    return 1.0 - reg_lower_gamma(nb, nb * lam / cfg.noise_var)


def detection_prob(cfg: SensingConfig, lam: float) -> float:
    """Probability of declaring the channel busy when it is busy."""
    nb = _check_threshold(cfg, lam)
    return 1.0 - reg_lower_gamma(nb, nb * lam / (cfg.noise_var + cfg.primary_var))


def sensing_performance(cfg: SensingConfig, lam: float) -> SensingPerformance:
    """Exact (P_f, P_d) pair for the given threshold."""
    return SensingPerformance(
        lam=float(lam),
        p_f=false_alarm_prob(cfg, lam),
        p_d=detection_prob(cfg, lam),
    )


def sensing_performance_gaussian(cfg: SensingConfig, lam: float) -> SensingPerformance:
    """(P_f, P_d) under a normal approximation of the test statistic.

    The averaged power statistic has mean equal to the per-sample power
    and variance equal to its square over the sample count; accurate for
    large sample counts and kept for validating the exact expressions.
    """
    nb = _check_threshold(cfg, lam)
    s0 = cfg.noise_var
    s1 = cfg.noise_var + cfg.primary_var
    p_f = gaussian_q((lam - s0) / (s0 / np.sqrt(nb)))
    p_d = gaussian_q((lam - s1) / (s1 / np.sqrt(nb)))
    return SensingPerformance(lam=float(lam), p_f=float(p_f), p_d=float(p_d))
