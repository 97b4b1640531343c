"""
Power control: full-power baseline, max-min bisection on the communication
coefficients, line search on the sensing coefficients and the alternating loop.
"""

import logging
from typing import Callable, Optional

import numpy as np

from app.exceptions import DegenerateChannelError, DimensionError, NoCommunicationApError
from app.models.config import SystemConfig
from app.models.models import (
    AOResult,
    BisectionResult,
    ModeAssignment,
    NetworkRealization,
    PowerAllocation,
    SensingResult,
)
from app.services import metrics
from app.services.feasibility import (
    ComFeasibilityProblem,
    SenFeasibilityProblem,
    max_min_upper_bound,
    solve_feasibility,
)
from app.utils.logging import perf_logger

logger = logging.getLogger(__name__)

PowerScheme = Callable[[NetworkRealization, ModeAssignment], PowerAllocation]


def _min_sinr(net, a, p: PowerAllocation, config: SystemConfig) -> float:
    return float(np.min(metrics.sinr_all(net, a, p, config)))


def npc_allocation(net: NetworkRealization, a: ModeAssignment, config: SystemConfig) -> PowerAllocation:
    """Full power everywhere: equal per-user shares on C-APs, eta_m = 1 on S-APs"""
    if a.M != net.M:
        raise DimensionError(f"mode vector has {a.M} entries for {net.M} APs")
    eta_com = np.zeros((net.M, net.K))
    eta_sen = np.zeros(net.M)

    com = a.com_indices
    if com.size:
        totals = np.sum(net.gamma[com], axis=1)
        degenerate = com[totals <= 0]
        if degenerate.size:
            raise DegenerateChannelError(f"C-APs {degenerate.tolist()} have zero estimation variance to every user")
        eta_com[com] = (1.0 / (net.antennas * totals))[:, None]
    eta_sen[a.sen_indices] = 1.0
    return PowerAllocation(eta_com, eta_sen)


def _checked_sensing(net: NetworkRealization, a: ModeAssignment, eta_sen, config: SystemConfig) -> np.ndarray:
    eta_sen = np.asarray(eta_sen, dtype=float)
    if eta_sen.shape != (net.M,):
        raise DimensionError(f"eta_sen has shape {eta_sen.shape}, expected ({net.M},)")
    limit = 1.0 - a.a + config.check_tolerance
    if np.any(eta_sen < 0) or np.any(eta_sen > limit):
        raise ValueError("eta_sen must satisfy 0 <= eta_m <= 1 - a_m")
    return np.where(a.a == 1, 0.0, np.minimum(eta_sen, 1.0))


def bisect_com_powers(
    net: NetworkRealization,
    a: ModeAssignment,
    eta_sen,
    config: SystemConfig,
    incumbent: Optional[PowerAllocation] = None,
) -> BisectionResult:
    """
    Max-min SINR communication coefficients for fixed sensing coefficients

    Bisects the SINR level on [t_min, t_max], solving one feasibility program per
    step. A feasible incumbent raises t_min to its own min-SINR and is returned
    when no probe beats it.
    """
    if not a.com_indices.size:
        raise NoCommunicationApError("bisection needs at least one C-AP")
    eta_sen = _checked_sensing(net, a, eta_sen, config)

    t_max = max_min_upper_bound(ComFeasibilityProblem.build(net, a, eta_sen, 0.0, config))
    epsilon = config.epsilon_bisection * t_max

    best = PowerAllocation(np.zeros((net.M, net.K)), eta_sen)
    lo, hi = 0.0, t_max
    if incumbent is not None:
        incumbent.check_shape(net.M, net.K)
        candidate = PowerAllocation(incumbent.eta_com, eta_sen)
        if metrics.audit_allocation(net, a, candidate, config).ok:
            value = _min_sinr(net, a, candidate, config)
            if value > lo:
                lo = min(value, t_max)
                best = candidate

    t_min = lo
    iterations = 0
    warm_start = None
    while hi - lo > epsilon:
        mid = 0.5 * (lo + hi)
        problem = ComFeasibilityProblem.build(net, a, eta_sen, mid, config)
        outcome = solve_feasibility(problem, config, warm_start)
        iterations += 1
        if outcome.feasible:
            lo = mid
            best = PowerAllocation(outcome.point, eta_sen)
            warm_start = outcome.warm_start if outcome.warm_start is not None else warm_start
        else:
            hi = mid
        logger.debug(
            f"Bisection probe t={mid:.6g}: {outcome.status}",
            extra={"iterations": outcome.iterations, "t_star": mid, "status": outcome.status},
        )

    audit = metrics.audit_allocation(net, a, best, config)
    t_star = _min_sinr(net, a, best, config)
    logger.debug(
        "Bisection finished",
        extra={"iterations": iterations, "t_star": t_star, "status": "ok" if audit.ok else "audit_failed"},
    )
    return BisectionResult(
        t_star=t_star,
        allocation=best,
        iterations=iterations,
        feasible=audit.ok,
        t_min=lo,
        t_max=hi,
        status="ok" if audit.ok else "; ".join(audit.violations),
    )


def _sensing_point_holds(net, a, eta_com, eta_sen, level: float, config: SystemConfig) -> bool:
    # Plain formula re-check of a sensing point
    allocation = PowerAllocation(eta_com, eta_sen)
    if level > 0 and _min_sinr(net, a, allocation, config) < level * (1.0 - config.check_tolerance):
        return False
    return metrics.audit_allocation(net, a, allocation, config).ok


def optimize_sen_powers(
    net: NetworkRealization,
    a: ModeAssignment,
    eta_com,
    config: SystemConfig,
    incumbent=None,
) -> SensingResult:
    """
    Sensing coefficients maximizing the min-SINR for fixed communication coefficients

    Line search over the level; each level is a linear feasibility program.
    """
    eta_com = np.asarray(eta_com, dtype=float)
    if eta_com.shape != (net.M, net.K):
        raise DimensionError(f"eta_com has shape {eta_com.shape}, expected ({net.M}, {net.K})")
    eta_com = np.where(a.a[:, None] == 1, eta_com, 0.0)

    iterations = 1
    floor = solve_feasibility(SenFeasibilityProblem.build(net, a, eta_com, 0.0, config), config)
    if not floor.feasible:
        return SensingResult(eta_sen=np.zeros(net.M), rho_star=0.0, iterations=iterations, feasible=False)

    level_max = _min_sinr(net, a, PowerAllocation(eta_com, np.zeros(net.M)), config)
    best = floor.point
    lo = 0.0
    if level_max > 0:
        iterations += 1
        top = solve_feasibility(SenFeasibilityProblem.build(net, a, eta_com, level_max, config), config)
        if top.feasible and _sensing_point_holds(net, a, eta_com, top.point, level_max, config):
            rho_star = _min_sinr(net, a, PowerAllocation(eta_com, top.point), config)
            return SensingResult(eta_sen=top.point, rho_star=rho_star, iterations=iterations, feasible=True)

        if incumbent is not None:
            candidate = _checked_sensing(net, a, incumbent, config)
            value = _min_sinr(net, a, PowerAllocation(eta_com, candidate), config)
            if value > lo and _sensing_point_holds(net, a, eta_com, candidate, value, config):
                lo, best = value, candidate

        hi = level_max
        epsilon = config.epsilon_bisection * level_max
        while hi - lo > epsilon:
            mid = 0.5 * (lo + hi)
            outcome = solve_feasibility(SenFeasibilityProblem.build(net, a, eta_com, mid, config), config)
            iterations += 1
            if outcome.feasible and _sensing_point_holds(net, a, eta_com, outcome.point, mid, config):
                lo, best = mid, outcome.point
            else:
                hi = mid

    rho_star = _min_sinr(net, a, PowerAllocation(eta_com, best), config)
    feasible = metrics.audit_allocation(net, a, PowerAllocation(eta_com, best), config).ok
    logger.debug(
        "Sensing line search finished",
        extra={"iterations": iterations, "rho_star": rho_star, "status": "ok" if feasible else "infeasible"},
    )
    return SensingResult(eta_sen=np.asarray(best), rho_star=rho_star, iterations=iterations, feasible=feasible)


def initial_allocation(net: NetworkRealization, a: ModeAssignment, config: SystemConfig) -> PowerAllocation:
    """Full-power start with communication powers scaled down until the MASR holds"""
    npc = npc_allocation(net, a, config)
    if config.kappa <= 0:
        return npc
    p_com = float(np.sum(npc.eta_com * net.gamma))
    p_sen = float(np.sum(npc.eta_sen))
    if p_com <= 0:
        return npc
    scale = min(1.0, p_sen / (config.kappa * p_com))
    return PowerAllocation(npc.eta_com * scale, npc.eta_sen)


def alternating_optimization(net: NetworkRealization, a: ModeAssignment, config: SystemConfig) -> AOResult:
    """
    Alternate the communication bisection and the sensing line search

    Each step starts from the current point, so the min-SINR trace never decreases.
    """
    if not a.com_indices.size or (config.kappa > 0 and not a.sen_indices.size):
        return AOResult(
            allocation=npc_allocation(net, a, config),
            trace=(),
            feasible=False,
            iterations=0,
            status="infeasible",
        )

    timer_id = perf_logger.start_timer("alternating_optimization")
    current = initial_allocation(net, a, config)
    value = _min_sinr(net, a, current, config)
    trace = [value]
    status = "iteration_limit"
    iterations = 0

    for iterations in range(1, config.ao_max_iterations + 1):
        com_step = bisect_com_powers(net, a, current.eta_sen, config, incumbent=current)
        candidate = com_step.allocation
        sen_step = optimize_sen_powers(net, a, candidate.eta_com, config, incumbent=candidate.eta_sen)
        if sen_step.feasible:
            candidate = PowerAllocation(candidate.eta_com, sen_step.eta_sen)

        new_value = _min_sinr(net, a, candidate, config)
        if new_value >= value and metrics.audit_allocation(net, a, candidate, config).ok:
            current = candidate
        else:
            new_value = value
        trace.append(new_value)
        logger.debug(
            f"AO iteration {iterations}: min SINR {new_value:.6g}",
            extra={"iterations": iterations, "t_star": new_value},
        )
        if new_value - value < config.ao_tolerance:
            status = "converged"
            break
        value = new_value

    feasible = metrics.audit_allocation(net, a, current, config).ok
    perf_logger.end_timer(timer_id, "alternating_optimization", iterations=iterations, status=status)
    return AOResult(
        allocation=current,
        trace=tuple(trace),
        feasible=feasible,
        iterations=iterations,
        status=status if feasible else "infeasible",
    )


def opc_allocation(net: NetworkRealization, a: ModeAssignment, config: SystemConfig) -> PowerAllocation:
    return alternating_optimization(net, a, config).allocation


def power_scheme(name: str, config: SystemConfig) -> PowerScheme:
    """Callback (net, assignment) -> PowerAllocation for the named scheme"""
    if name == "npc":
        return lambda net, a: npc_allocation(net, a, config)
    if name == "opc":
        return lambda net, a: opc_allocation(net, a, config)
    raise ValueError(f"unknown power scheme: {name!r}")
