"""Scenario parameterization: frame layout, power budgets, the four
per-scenario SNRs, outage thresholds, and fading tail probabilities.

A scenario fixes the frame length, the sensing slot, the bandwidth, the
QoS exponent, the prior probability that the primary user occupies the
channel, and the two average transmit powers (detected-busy and
detected-idle).  Interference from the primary user is treated as extra
Gaussian noise, which yields four SNR levels depending on the true and
detected channel states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .numerics import FadingKind, FadingModel
from .sensing import SensingConfig

__all__ = [
    "ScenarioConfig",
    "SnrQuad",
    "OutageThresholds",
    "derive_snrs",
    "outage_threshold",
    "outage_thresholds",
    "tail_prob",
]


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and system parameters of one cognitive-link scenario."""

    t_frame: float
    n_sense: float
    bandwidth: float
    theta: float
    rho: float
    p1_avg: float
    p2_avg: float
    noise_var: float = 1.0
    primary_var: float = 1.0
    fading: FadingModel = field(default_factory=FadingModel.rayleigh)

    def __post_init__(self) -> None:
        if not (0.0 < self.n_sense < self.t_frame):
            raise ConfigError("need 0 < sensing duration < frame duration")
        if not (self.theta > 0 and np.isfinite(self.theta)):
            raise ConfigError("QoS exponent must be positive")
        if not (0.0 <= self.rho <= 1.0):
            raise ConfigError("occupancy prior must lie in [0, 1]")
        if not (self.bandwidth > 0):
            raise ConfigError("bandwidth must be positive")
        if not (0.0 <= self.p1_avg <= self.p2_avg):
            raise ConfigError("need 0 <= busy power <= idle power")
        if not (self.noise_var > 0):
            raise ConfigError("noise variance must be positive")
        if self.primary_var < 0:
            raise ConfigError("primary signal variance cannot be negative")

    @classmethod
    def from_snr(
        cls,
        *,
        t_frame: float,
        n_sense: float,
        bandwidth: float,
        theta: float,
        rho: float,
        snr1_db: float,
        snr4_db: float,
        kappa: float = 1.0,
        noise_var: float = 1.0,
        fading: FadingModel | None = None,
    ) -> "ScenarioConfig":
        """Build a scenario from the two headline SNRs.

        ``snr1_db`` is the detected-busy SNR on a busy channel, ``snr4_db``
        the detected-idle SNR on an idle channel; ``kappa`` is the
        primary-to-noise variance ratio.  The average powers are
        back-derived from these ratios.
        """
        if kappa < 0:
            raise ConfigError("kappa cannot be negative")
        snr1 = 10.0 ** (snr1_db / 10.0)
        snr4 = 10.0 ** (snr4_db / 10.0)
        primary_var = kappa * noise_var
        p1 = snr1 * bandwidth * (noise_var + primary_var)
        p2 = snr4 * bandwidth * noise_var
        return cls(
            t_frame=t_frame,
            n_sense=n_sense,
            bandwidth=bandwidth,
            theta=theta,
            rho=rho,
            p1_avg=p1,
            p2_avg=p2,
            noise_var=noise_var,
            primary_var=primary_var,
            fading=fading if fading is not None else FadingModel.rayleigh(),
        )

    @property
    def sensing(self) -> SensingConfig:
        return SensingConfig(
            n_sense=self.n_sense,
            bandwidth=self.bandwidth,
            noise_var=self.noise_var,
            primary_var=self.primary_var,
        )

    @property
    def data_time(self) -> float:
        """Seconds per frame available for data transmission."""
        return self.t_frame - self.n_sense

    def with_overrides(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)

    def to_json_dict(self) -> dict:
        """Canonical JSON form; dB conversion happens only here."""
        snrs = derive_snrs(self)
        fad: dict = {"kind": self.fading.kind.value, "mean_power": self.fading.mean_power}
        if self.fading.kind is FadingKind.TABULATED_CDF:
            fad["z_grid"] = [float(z) for z in self.fading.z_grid]
            fad["cdf_grid"] = [float(c) for c in self.fading.cdf_grid]
        return {
            "T_s": self.t_frame,
            "N_s": self.n_sense,
            "B_hz": self.bandwidth,
            "theta": self.theta,
            "rho": self.rho,
            "snr1_db": 10.0 * math.log10(snrs.snr1),
            "snr4_db": 10.0 * math.log10(snrs.snr4),
            "kappa": self.primary_var / self.noise_var,
            "fading": fad,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> tuple["ScenarioConfig", dict]:
        """Parse the canonical JSON form.

        Returns the scenario plus a dict of defaults that were assumed
        because the document omitted them (recorded in run manifests).
        """
        allowed = {"T_s", "N_s", "B_hz", "theta", "rho", "snr1_db", "snr4_db",
                   "kappa", "fading", "scheme"}
        unknown = set(doc) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"T_s", "N_s", "B_hz", "theta", "rho", "snr1_db", "snr4_db"} - set(doc)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        assumed: dict = {}
        if "kappa" not in doc:
            assumed["kappa"] = 1.0
        fad_doc = doc.get("fading")
        if fad_doc is None:
            assumed["fading"] = {"kind": "rayleigh", "mean_power": 1.0}
            fading = FadingModel.rayleigh()
        else:
            fading = _fading_from_json(fad_doc)
        try:
            cfg = cls.from_snr(
                t_frame=float(doc["T_s"]),
                n_sense=float(doc["N_s"]),
                bandwidth=float(doc["B_hz"]),
                theta=float(doc["theta"]),
                rho=float(doc["rho"]),
                snr1_db=float(doc["snr1_db"]),
                snr4_db=float(doc["snr4_db"]),
                kappa=float(doc.get("kappa", 1.0)),
                fading=fading,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config value: {exc}") from exc
        return cfg, assumed


def _fading_from_json(doc: dict) -> FadingModel:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("fading must be an object with a 'kind' key")
    kind = str(doc["kind"]).lower()
    if kind in ("rayleigh", "rayleigh_power"):
        return FadingModel.rayleigh(float(doc.get("mean_power", 1.0)))
    if kind == "degenerate":
        return FadingModel.degenerate(float(doc.get("mean_power", 1.0)))
    if kind in ("tabulated", "tabulated_cdf"):
        if "z_grid" not in doc or "cdf_grid" not in doc:
            raise ConfigError("tabulated fading requires z_grid and cdf_grid")
        return FadingModel.tabulated(doc["z_grid"], doc["cdf_grid"])
    raise ConfigError(f"unknown fading kind: {doc['kind']!r}")


@dataclass(frozen=True)
class SnrQuad:
    """Average SNR in the four (true state, detected state) scenarios:
    busy/detected-busy, busy/detected-idle, idle/detected-busy,
    idle/detected-idle."""

    snr1: float
    snr2: float
    snr3: float
    snr4: float

    def __post_init__(self) -> None:
        eps = 1e-12
        if self.snr1 > self.snr3 * (1 + eps) or self.snr2 > self.snr4 * (1 + eps):
            raise ConfigError("interference can only reduce SNR")
        if self.snr1 > self.snr2 * (1 + eps) or self.snr3 > self.snr4 * (1 + eps):
            raise ConfigError("detected-idle power cannot be below detected-busy power")


def derive_snrs(cfg: ScenarioConfig) -> SnrQuad:
    """The four scenario SNRs from powers, bandwidth, and variances."""
    denom_int = cfg.bandwidth * (cfg.noise_var + cfg.primary_var)
    denom = cfg.bandwidth * cfg.noise_var
    return SnrQuad(
        snr1=cfg.p1_avg / denom_int,
        snr2=cfg.p2_avg / denom_int,
        snr3=cfg.p1_avg / denom,
        snr4=cfg.p2_avg / denom,
    )


def outage_threshold(r, snr: float, bandwidth: float):
    """Fading power below which a fixed rate r exceeds channel capacity."""
    if snr <= 0:
        raise ConfigError("SNR must be positive")
    if bandwidth <= 0:
        raise ConfigError("bandwidth must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ConfigError("rates cannot be negative")
    out = np.expm1(np.log(2.0) * r / bandwidth) / snr
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class OutageThresholds:
    """Outage thresholds for the four scenarios at fixed rates."""

    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float


def outage_thresholds(cfg: ScenarioConfig, r1: float, r2: float) -> OutageThresholds:
    """Per-scenario outage thresholds for detected-busy rate r1 and
    detected-idle rate r2."""
    snrs = derive_snrs(cfg)
    return OutageThresholds(
        alpha1=outage_threshold(r1, snrs.snr1, cfg.bandwidth),
        alpha2=outage_threshold(r2, snrs.snr2, cfg.bandwidth),
        alpha3=outage_threshold(r1, snrs.snr3, cfg.bandwidth),
        alpha4=outage_threshold(r2, snrs.snr4, cfg.bandwidth),
    )


def tail_prob(model: FadingModel, alpha):
    """P{fading power exceeds alpha}."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0):
        raise ConfigError("threshold must be nonnegative")
    return model.tail(alpha)
