"""
Closed-form performance metrics of a (mode assignment, power allocation) pair

All powers are normalized by the noise power. Shapes: beta/gamma (M, K),
eta_com (M, K), eta_sen (M,), a (M,).
"""

import math
from typing import Optional, Tuple

import numpy as np

from app.exceptions import DimensionError
from app.models.config import SystemConfig
from app.models.models import AuditResult, MetricsReport, ModeAssignment, NetworkRealization, PowerAllocation


def check_inputs(net: NetworkRealization, a: ModeAssignment, p: PowerAllocation) -> np.ndarray:
    if a.M != net.M:
        raise DimensionError(f"mode vector has {a.M} entries for {net.M} APs")
    p.check_shape(net.M, net.K)
    return a.a.astype(float)


def sinr_all(net: NetworkRealization, a: ModeAssignment, p: PowerAllocation, config: SystemConfig) -> np.ndarray:
    """Closed-form downlink SINR of every user under conjugate precoding"""
    am = check_inputs(net, a, p)
    N, rho = net.antennas, config.rho

    coherent = np.sum(am[:, None] * np.sqrt(p.eta_com) * net.gamma, axis=0)
    numerator = rho * N**2 * coherent**2

    # Per-AP effective communication power sum_k' eta_mk' gamma_mk'
    ap_power = am * np.sum(p.eta_com * net.gamma, axis=1)
    interference = rho * N * (ap_power @ net.beta)
    sensing = rho * (((1.0 - am) * p.eta_sen) @ net.beta)
    return numerator / (interference + sensing + 1.0)


def sinr_closed_form(net, a: ModeAssignment, p: PowerAllocation, k: int, config: SystemConfig) -> float:
    if not 0 <= k < net.K:
        raise DimensionError(f"user index {k} out of range for K={net.K}")
    return float(sinr_all(net, a, p, config)[k])


def spectral_efficiency(sinr, config: SystemConfig):
    """(1 - tau_t/tau) log2(1 + sinr), bits/s/Hz"""
    values = np.asarray(sinr, dtype=float)
    if np.any(values < 0):
        raise ValueError("SINR must be non-negative")
    se = config.training_overhead * np.log2(1.0 + values)
    return float(se) if se.ndim == 0 else se


def _power_sums(net, a: ModeAssignment, p: PowerAllocation) -> Tuple[float, float]:
    am = check_inputs(net, a, p)
    com = math.fsum((am[:, None] * p.eta_com * net.gamma).ravel())
    sen = math.fsum(((1.0 - am) * p.eta_sen).ravel())
    return com, sen


def power_pattern(net, a: ModeAssignment, p: PowerAllocation, config: SystemConfig) -> Tuple[float, float]:
    """Average spatial power pattern at the target, split into (p_com, p_sen)"""
    com, sen = _power_sums(net, a, p)
    return config.rho * com, config.rho * sen


def masr(net, a: ModeAssignment, p: PowerAllocation, config: Optional[SystemConfig] = None) -> float:
    """Sensing-to-communication power pattern ratio; +inf for x/0 with x > 0, 0 for 0/0"""
    com, sen = _power_sums(net, a, p)
    if com == 0.0:
        return math.inf if sen > 0.0 else 0.0
    return sen / com


def masr_margin(net, a: ModeAssignment, p: PowerAllocation, kappa: float) -> float:
    """Linear MASR form sum (1-a) eta_m - kappa sum a eta_mk gamma_mk; >= 0 iff MASR >= kappa"""
    com, sen = _power_sums(net, a, p)
    return sen - kappa * com


def constraint_slacks(net, a: ModeAssignment, p: PowerAllocation) -> np.ndarray:
    """
    Per-AP slack of the power constraints, negative when violated

    C-AP: min(1/N - sum_k eta_mk gamma_mk, -eta_m); S-AP: min(1/N, 1 - eta_m).
    """
    am = check_inputs(net, a, p)
    cap_com = 1.0 / net.antennas - am * np.sum(p.eta_com * net.gamma, axis=1)
    cap_sen = (1.0 - am) - p.eta_sen
    return np.minimum(cap_com, cap_sen)


def audit_allocation(
    net: NetworkRealization,
    a: ModeAssignment,
    p: PowerAllocation,
    config: SystemConfig,
    tol: Optional[float] = None,
) -> AuditResult:
    """
    Independent check of the per-AP caps and the MASR requirement

    Plain formula evaluation only; shares no code with the solvers.
    """
    tol = config.check_tolerance if tol is None else tol
    am = check_inputs(net, a, p)
    N = net.antennas
    violations = []

    cap_com = 1.0 / N - am * np.sum(p.eta_com * net.gamma, axis=1)
    cap_sen = (1.0 - am) - p.eta_sen
    for m in np.flatnonzero(cap_com < -tol / N):
        violations.append(f"AP {m}: communication power {1.0 / N - cap_com[m]:.6g} exceeds 1/N")
    for m in np.flatnonzero(cap_sen < -tol):
        violations.append(f"AP {m}: sensing coefficient {p.eta_sen[m]:.6g} exceeds 1 - a_m")

    ratio = masr(net, a, p, config)
    masr_slack = ratio - config.kappa
    if config.kappa > 0 and ratio < config.kappa * (1.0 - tol):
        violations.append(f"MASR {ratio:.6g} below kappa {config.kappa:.6g}")

    return AuditResult(
        ok=not violations,
        per_ap_cap_slack=cap_com,
        sensing_cap_slack=cap_sen,
        masr_slack=masr_slack,
        violations=tuple(violations),
    )


def evaluate(net: NetworkRealization, a: ModeAssignment, p: PowerAllocation, config: SystemConfig) -> MetricsReport:
    sinr = sinr_all(net, a, p, config)
    se = spectral_efficiency(sinr, config)
    se = np.atleast_1d(se)
    p_com, p_sen = power_pattern(net, a, p, config)
    return MetricsReport(
        sinr=sinr,
        se=se,
        min_se=float(np.min(se)) if se.size else 0.0,
        masr=masr(net, a, p, config),
        p_com=p_com,
        p_sen=p_sen,
        constraint_slacks=constraint_slacks(net, a, p),
    )
