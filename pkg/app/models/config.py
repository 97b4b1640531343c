"""Scenario configuration: the SystemConfig model and its key-value file format.

File format (one entry per line)::

    # comment
    M = 20
    kappa = 10
    target_position = 0.25, 0.25, 0

Keys are the field names of :class:`SystemConfig`; unknown keys are rejected.
See ``config/isac.example.conf`` for the documented schema.
"""

import math
from pathlib import Path
from typing import Any, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.exceptions import ConfigError

NOISE_DBM = -108.0

# Long-running layout of the full-size experiments
PAPER_SCALE = {"M": 80, "N": 3, "K_d": 5, "kappa": 15.0}


def _normalized_power(power_w: float, noise_dbm: float = NOISE_DBM) -> float:
    noise_w = 10 ** ((noise_dbm - 30.0) / 10.0)
    return power_w / noise_w


class SystemConfig(BaseModel):
    """All scenario parameters of one cell-free ISAC deployment"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # Network dimensions
    M: int = Field(default=20, ge=1)
    N: int = Field(default=3, ge=1)
    K_d: int = Field(default=3, ge=1)
    D_km: float = Field(default=0.5, gt=0)

    # Coherence block
    tau: int = Field(default=200, ge=1)
    tau_t: Optional[int] = None

    # Normalized powers (linear, divided by the noise power). When rho or
    # rho_t is omitted it is derived from the physical powers below.
    ap_power_w: float = Field(default=1.0, gt=0)
    pilot_power_w: float = Field(default=0.25, gt=0)
    noise_dbm: float = NOISE_DBM
    rho: Optional[float] = None
    rho_t: Optional[float] = None

    # Large-scale fading
    sigma_sh_dB: float = Field(default=8.0, ge=0)
    d0_km: float = 0.01
    d1_km: float = 0.05
    L_dB: float = 140.72
    correlated_shadowing: bool = True
    shadow_delta: float = Field(default=0.5, ge=0, le=1)
    shadow_decorrelation_km: float = Field(default=0.1, gt=0)

    # Sensing
    kappa: float = 10.0
    antenna_spacing_over_lambda: float = Field(default=0.5, gt=0)
    target_position: Tuple[float, float, float] = (0.25, 0.25, 0.0)
    ap_height_m: float = 15.0
    # Informational: user height only enters through L_dB
    user_height_m: float = 1.65

    # Algorithms
    epsilon_bisection: float = 1e-3
    e_min_greedy: float = 1e-3
    ao_tolerance: float = 1e-4
    ao_max_iterations: int = Field(default=20, ge=1)
    solver_tolerance: float = 1e-8
    solver_max_iterations: int = Field(default=100_000, ge=1)
    check_tolerance: float = 1e-6
    greedy_power_scheme: Literal["npc", "opc"] = "npc"
    literal_constraint_21d: bool = False
    solver_backend: Literal["admm", "cvxpy"] = "admm"
    dump_dir: Optional[str] = None

    # Experiment
    seed: int = 0
    drops: int = Field(default=50, ge=1)

    @field_validator("target_position", mode="before")
    @classmethod
    def _split_position(cls, value: Any) -> Any:
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(",") if p.strip()]
            return tuple(float(p) for p in parts)
        return value

    @model_validator(mode="before")
    @classmethod
    def _derive_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        if data.get("tau_t") in (None, ""):
            data["tau_t"] = data.get("K_d", cls.model_fields["K_d"].default)
        noise_dbm = float(data.get("noise_dbm", NOISE_DBM))
        if data.get("rho") in (None, ""):
            data["rho"] = _normalized_power(float(data.get("ap_power_w", 1.0)), noise_dbm)
        if data.get("rho_t") in (None, ""):
            data["rho_t"] = _normalized_power(float(data.get("pilot_power_w", 0.25)), noise_dbm)
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "SystemConfig":
        if self.tau_t < self.K_d:
            raise ValueError(f"tau_t={self.tau_t} must be >= K_d={self.K_d} (orthogonal pilots)")
        if self.tau_t > self.tau:
            raise ValueError(f"tau_t={self.tau_t} exceeds the coherence interval tau={self.tau}")
        if not (0 < self.d0_km < self.d1_km < self.D_km):
            raise ValueError("path-loss breakpoints must satisfy 0 < d0_km < d1_km < D_km")
        if self.rho <= 0 or self.rho_t <= 0:
            raise ValueError("rho and rho_t must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        tolerances = {
            "epsilon_bisection": self.epsilon_bisection,
            "e_min_greedy": self.e_min_greedy,
            "ao_tolerance": self.ao_tolerance,
            "solver_tolerance": self.solver_tolerance,
            "check_tolerance": self.check_tolerance,
        }
        for name, value in tolerances.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive")
        return self

    def __init__(self, **data: Any):
        try:
            super().__init__(**data)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(p) for p in first.get("loc", ())) or None
            raise ConfigError(first.get("msg", str(exc)), field=field) from exc

    @property
    def training_overhead(self) -> float:
        """Fraction of the coherence block left for data, (1 - tau_t/tau)"""
        return 1.0 - self.tau_t / self.tau

    def with_overrides(self, **overrides: Any) -> "SystemConfig":
        data = self.model_dump()
        if "K_d" in overrides and "tau_t" not in overrides:
            data["tau_t"] = None
        if {"ap_power_w", "noise_dbm"} & overrides.keys() and "rho" not in overrides:
            data["rho"] = None
        if {"pilot_power_w", "noise_dbm"} & overrides.keys() and "rho_t" not in overrides:
            data["rho_t"] = None
        data.update(overrides)
        return SystemConfig(**data)

    @classmethod
    def paper_scale(cls, **overrides: Any) -> "SystemConfig":
        data = dict(PAPER_SCALE)
        data.update(overrides)
        return cls(**data)


def parse_config_text(text: str) -> dict:
    entries: dict = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("missing key", line=number)
        if key not in SystemConfig.model_fields:
            raise ConfigError("unknown configuration key", field=key, line=number)
        if key in entries:
            raise ConfigError("duplicate key", field=key, line=number)
        entries[key] = value
    return entries


def load_config_file(path: str | Path, **overrides: Any) -> SystemConfig:
    """Read a ``key = value`` configuration file into a validated SystemConfig"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {path}: {exc}") from exc
    entries = parse_config_text(text)
    for key in ("rho", "rho_t"):
        # Allow "10^13.8" for powers
        value = entries.get(key)
        if isinstance(value, str) and "^" in value:
            base, exponent = value.split("^", 1)
            entries[key] = math.pow(float(base), float(exponent))
    entries.update(overrides)
    return SystemConfig(**entries)
