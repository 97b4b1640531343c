"""
Domain types carried between the services

Array-valued results are frozen dataclasses holding read-only numpy arrays.
Validation runs in ``__post_init__`` and raises DimensionError or ValueError.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.exceptions import DimensionError


def _frozen(array, dtype=float) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


class Scheme(str, Enum):
    """Experiment pipelines: mode selection followed by power control"""

    GAP_OPC = "gap-opc"
    GAP_NPC = "gap-npc"
    RAP_NPC = "rap-npc"

    @property
    def greedy(self) -> bool:
        return self in (Scheme.GAP_OPC, Scheme.GAP_NPC)

    @property
    def optimized(self) -> bool:
        return self is Scheme.GAP_OPC


@dataclass(frozen=True)
class NetworkRealization:
    """One random drop: geometry plus large-scale statistics"""

    ap_positions: np.ndarray      # (M, 2) km
    user_positions: np.ndarray    # (K, 2) km
    distances_km: np.ndarray      # (M, K) torus distances
    beta: np.ndarray              # (M, K) large-scale coefficients
    gamma: np.ndarray             # (M, K) estimation variances
    target_angles: np.ndarray     # (M, 2) azimuth, elevation in radians
    antennas: int
    spacing_over_lambda: float = 0.5

    def __post_init__(self):
        for name in ("ap_positions", "user_positions", "distances_km", "beta", "gamma", "target_angles"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

        M, K = self.beta.shape if self.beta.ndim == 2 else (None, None)
        if M is None:
            raise DimensionError(f"beta must be a 2-D (M, K) array, got shape {self.beta.shape}")
        expected = {
            "ap_positions": (M, 2),
            "user_positions": (K, 2),
            "distances_km": (M, K),
            "gamma": (M, K),
            "target_angles": (M, 2),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if self.antennas < 1:
            raise DimensionError("antennas must be >= 1")
        if not np.all(self.beta > 0):
            raise ValueError("beta must be strictly positive")
        if np.any(self.gamma < 0) or np.any(self.gamma > self.beta):
            raise ValueError("gamma must satisfy 0 <= gamma <= beta")

    @property
    def M(self) -> int:
        return self.beta.shape[0]

    @property
    def K(self) -> int:
        return self.beta.shape[1]

    @classmethod
    def from_statistics(
        cls,
        beta,
        gamma,
        antennas: int,
        target_angles=None,
        spacing_over_lambda: float = 0.5,
    ) -> "NetworkRealization":
        """Build a realization from large-scale statistics alone (no geometry)"""
        beta = np.atleast_2d(np.asarray(beta, dtype=float))
        gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
        M, K = beta.shape
        if target_angles is None:
            target_angles = np.zeros((M, 2))
        return cls(
            ap_positions=np.zeros((M, 2)),
            user_positions=np.zeros((K, 2)),
            distances_km=np.zeros((M, K)),
            beta=beta,
            gamma=gamma,
            target_angles=target_angles,
            antennas=antennas,
            spacing_over_lambda=spacing_over_lambda,
        )


@dataclass(frozen=True)
class ModeAssignment:
    """Binary AP mode vector: 1 = communication AP, 0 = sensing AP"""

    a: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.a)
        if values.ndim != 1:
            raise DimensionError("mode vector must be 1-D")
        if not np.all((values == 0) | (values == 1)):
            raise ValueError("mode flags must be 0 or 1")
        object.__setattr__(self, "a", _frozen(values, dtype=np.int8))

    @classmethod
    def all_sensing(cls, M: int) -> "ModeAssignment":
        return cls(np.zeros(M, dtype=np.int8))

    @classmethod
    def from_indices(cls, M: int, com_indices) -> "ModeAssignment":
        a = np.zeros(M, dtype=np.int8)
        a[list(com_indices)] = 1
        return cls(a)

    @property
    def M(self) -> int:
        return self.a.shape[0]

    @property
    def com_indices(self) -> np.ndarray:
        return np.flatnonzero(self.a == 1)

    @property
    def sen_indices(self) -> np.ndarray:
        return np.flatnonzero(self.a == 0)

    def with_com(self, m: int) -> "ModeAssignment":
        a = self.a.copy()
        a[m] = 1
        return ModeAssignment(a)

    def __len__(self) -> int:
        return self.M


@dataclass(frozen=True)
class PowerAllocation:
    """Communication coefficients eta_com (M, K) and sensing coefficients eta_sen (M,)"""

    eta_com: np.ndarray
    eta_sen: np.ndarray

    def __post_init__(self):
        eta_com = np.asarray(self.eta_com, dtype=float)
        eta_sen = np.asarray(self.eta_sen, dtype=float)
        if eta_com.ndim != 2 or eta_sen.ndim != 1 or eta_com.shape[0] != eta_sen.shape[0]:
            raise DimensionError(
                f"inconsistent allocation shapes eta_com={eta_com.shape} eta_sen={eta_sen.shape}"
            )
        if not (np.all(np.isfinite(eta_com)) and np.all(np.isfinite(eta_sen))):
            raise ValueError("power coefficients must be finite")
        if np.any(eta_com < 0) or np.any(eta_sen < 0):
            raise ValueError("power coefficients must be non-negative")
        object.__setattr__(self, "eta_com", _frozen(eta_com))
        object.__setattr__(self, "eta_sen", _frozen(eta_sen))

    @classmethod
    def zeros(cls, M: int, K: int) -> "PowerAllocation":
        return cls(np.zeros((M, K)), np.zeros(M))

    def check_shape(self, M: int, K: int) -> None:
        if self.eta_com.shape != (M, K) or self.eta_sen.shape != (M,):
            raise DimensionError(
                f"allocation shapes {self.eta_com.shape}/{self.eta_sen.shape} do not match M={M}, K={K}"
            )


@dataclass(frozen=True)
class AuditResult:
    """Outcome of the independent constraint audit"""

    ok: bool
    per_ap_cap_slack: np.ndarray    # 1/N - a_m * sum_k eta_mk gamma_mk
    sensing_cap_slack: np.ndarray   # (1 - a_m) - eta_m
    masr_slack: float               # masr - kappa (may be inf)
    violations: Tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricsReport:
    sinr: np.ndarray
    se: np.ndarray
    min_se: float
    masr: float
    p_com: float
    p_sen: float
    constraint_slacks: np.ndarray

    @property
    def min_sinr(self) -> float:
        return float(np.min(self.sinr)) if self.sinr.size else 0.0

    def to_dict(self) -> Dict:
        return {
            "sinr": self.sinr.tolist(),
            "se": self.se.tolist(),
            "min_se": self.min_se,
            "masr": self.masr,
            "p_com": self.p_com,
            "p_sen": self.p_sen,
            "constraint_slacks": self.constraint_slacks.tolist(),
        }


@dataclass(frozen=True)
class GreedyStep:
    ap: int
    min_sinr: float
    committed: bool


@dataclass(frozen=True)
class SelectionOutcome:
    assignment: ModeAssignment
    trace: Tuple[GreedyStep, ...] = ()
    iterations: int = 0

    @property
    def committed_moves(self) -> List[int]:
        return [step.ap for step in self.trace if step.committed]


@dataclass(frozen=True)
class BisectionResult:
    t_star: float
    allocation: PowerAllocation
    iterations: int
    feasible: bool
    t_min: float = 0.0
    t_max: float = 0.0
    status: str = "ok"


@dataclass(frozen=True)
class SensingResult:
    eta_sen: np.ndarray
    rho_star: float
    iterations: int
    feasible: bool


@dataclass(frozen=True)
class AOResult:
    allocation: PowerAllocation
    trace: Tuple[float, ...]
    feasible: bool
    iterations: int
    status: str = "converged"

    @property
    def min_sinr(self) -> float:
        return self.trace[-1] if self.trace else 0.0


@dataclass(frozen=True)
class ChannelRealization:
    """True channels, MMSE estimates and errors, shape ([T,] M, K, N)"""

    g: np.ndarray
    g_hat: np.ndarray
    g_tilde: np.ndarray


@dataclass(frozen=True)
class Beamformers:
    t_com: np.ndarray   # ([T,] M, K, N) conjugate precoders
    t_sen: np.ndarray   # (M, N) sensing steering vectors


@dataclass(frozen=True)
class OracleEstimate:
    """Monte Carlo estimates of the SINR decomposition, with standard errors"""

    ds: np.ndarray          # (K,) complex, mean of the desired-signal gain
    ds_closed: np.ndarray   # (K,) analytic expectation used for BU centering
    bu_var: np.ndarray      # (K,)
    iui_var: np.ndarray     # (K, K), [k, j] interference at user k from user j's stream
    ir_var: np.ndarray      # (K,)
    sinr_mc: np.ndarray     # (K,)
    pattern_mc: Tuple[float, float]
    trials: int
    stderr: Dict[str, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class VerificationReport:
    """Relative errors of every closed form against its Monte Carlo estimate"""

    relative_errors: Dict[str, float]
    tolerance: float
    trials: int

    @property
    def passed(self) -> bool:
        return all(err <= self.tolerance for err in self.relative_errors.values())

    @property
    def worst(self) -> Tuple[str, float]:
        if not self.relative_errors:
            return ("", 0.0)
        name = max(self.relative_errors, key=self.relative_errors.get)
        return name, self.relative_errors[name]


@dataclass(frozen=True)
class DropRecord:
    drop: int
    min_se: float
    masr: float
    feasible: bool
    failed: bool = False
    error: Optional[str] = None
    committed_moves: int = 0
    com_aps: int = 0


@dataclass
class ExperimentResult:
    scheme: Scheme
    kappa: float
    M: int
    N: int
    K_d: int
    drops: List[DropRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def samples(self) -> np.ndarray:
        return np.array([record.min_se for record in self.drops], dtype=float)

    @property
    def infeasible_drops(self) -> int:
        return sum(1 for record in self.drops if not record.feasible)

    @property
    def failed_drops(self) -> int:
        return sum(1 for record in self.drops if record.failed)

    @property
    def failure_rate(self) -> float:
        return self.failed_drops / len(self.drops) if self.drops else 0.0
