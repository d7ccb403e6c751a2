"""Eight-state service model for fixed-rate transmission.

Each frame lands in one of eight states given by the true channel
occupancy, the sensing decision, and whether the fixed rate survives the
instantaneous capacity (ON) or not (OFF).  Occupancy and fading are
independent across frames, so every row of the transition matrix is the
same probability vector: the matrix has unit rank and its spectral radius
reduces to a weighted trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ScenarioConfig, outage_thresholds, tail_prob
from .errors import ConfigError
from .sensing import SensingPerformance

__all__ = [
    "StateModel",
    "MgfDiag",
    "OFF_STATES",
    "transition_probs",
    "spectral_radius_rank1",
    "explicit_transition_matrix",
]

# 1-based labels of the zero-service (outage) states.
OFF_STATES = (2, 4, 6, 8)
_OFF_IDX = np.array([s - 1 for s in OFF_STATES])


@dataclass(frozen=True, eq=False)
class StateModel:
    """Per-frame state probabilities and service in bits for each state."""

    p: np.ndarray
    service_bits: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        s = np.asarray(self.service_bits, dtype=float)
        if p.shape != (8,) or s.shape != (8,):
            raise ConfigError("state model needs 8 probabilities and 8 service rates")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ConfigError("state probabilities must be nonnegative and sum to 1")
        if np.any(s < 0):
            raise ConfigError("service cannot be negative")
        if np.any(s[_OFF_IDX] != 0.0):
            raise ConfigError("outage states must carry zero service")
        for name, arr in (("p", p), ("service_bits", s)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def mean_service(self) -> float:
        """Expected service per frame in bits."""
        return float(np.dot(self.p, self.service_bits))


@dataclass(frozen=True, eq=False)
class MgfDiag:
    """Diagonal of per-state moment-generating-function values."""

    phi: np.ndarray

    def __post_init__(self) -> None:
        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != (8,):
            raise ConfigError("need 8 diagonal values")
        if np.any(phi < 0) or not np.all(np.isfinite(phi)):
            raise ConfigError("diagonal values must be finite and nonnegative")
        phi = phi.copy()
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)

    @classmethod
    def discounted(cls, sm: StateModel, theta: float) -> "MgfDiag":
        """exp(-theta * service) per state; equals 1 in zero-service states."""
        if theta <= 0:
            raise ConfigError("QoS exponent must be positive")
        return cls(np.exp(-theta * sm.service_bits))


def transition_probs(
    cfg: ScenarioConfig,
    perf: SensingPerformance,
    r1: float,
    r2: float,
) -> StateModel:
    """State probabilities for fixed rates r1 (detected busy) and r2
    (detected idle), in bits/s.

    The eight states follow the label order: (busy, detected busy, ON/OFF),
    (busy, detected idle, ON/OFF), (idle, detected busy, ON/OFF),
    (idle, detected idle, ON/OFF).
    """
    if r1 < 0 or r2 < 0:
        raise ConfigError("rates cannot be negative")
    if not isinstance(perf, SensingPerformance):
        raise ConfigError("need a SensingPerformance instance")
    alphas = outage_thresholds(cfg, r1, r2)
    t1 = tail_prob(cfg.fading, alphas.alpha1)
    t2 = tail_prob(cfg.fading, alphas.alpha2)
    t3 = tail_prob(cfg.fading, alphas.alpha3)
    t4 = tail_prob(cfg.fading, alphas.alpha4)
    rho, pd, pf = cfg.rho, perf.p_d, perf.p_f
    p = np.array([
        rho * pd * t1,
        rho * pd * (1.0 - t1),
        rho * (1.0 - pd) * t2,
        rho * (1.0 - pd) * (1.0 - t2),
        (1.0 - rho) * pf * t3,
        (1.0 - rho) * pf * (1.0 - t3),
        (1.0 - rho) * (1.0 - pf) * t4,
        (1.0 - rho) * (1.0 - pf) * (1.0 - t4),
    ])
    dt = cfg.data_time
    service = np.array([r1 * dt, 0.0, r2 * dt, 0.0, r1 * dt, 0.0, r2 * dt, 0.0])
    return StateModel(p=p, service_bits=service)


def spectral_radius_rank1(sm: StateModel, phi: MgfDiag) -> float:
    """Spectral radius of diag(phi) times the rank-1 transition matrix.

    With identical rows the product keeps unit rank, so the spectral
    radius equals its trace: the phi-weighted sum of state probabilities.
    """
    return float(np.dot(phi.phi, sm.p))


def explicit_transition_matrix(sm: StateModel) -> np.ndarray:
    """The full 8x8 transition matrix (all rows identical)."""
    return np.tile(sm.p, (8, 1))
