# workers/tasks.py - Per-drop simulation task
"""
One drop of an experiment: place the network, select modes, allocate power,
audit the result and record the minimum per-user SE.

Runs inside worker processes; everything it needs is rebuilt from
(config, scheme, seed, drop index).
"""

import logging
import time

import numpy as np

from app.models.config import SystemConfig
from app.models.models import DropRecord, ModeAssignment, NetworkRealization, PowerAllocation, Scheme
from app.services import metrics
from app.services.power import alternating_optimization, npc_allocation
from app.services.selection import greedy_select, random_select
from app.services.streams import RandomStreams
from app.services.topology import place_network

logger = logging.getLogger(__name__)


def allocate(net: NetworkRealization, a: ModeAssignment, scheme: Scheme, config: SystemConfig) -> PowerAllocation:
    if scheme.optimized and a.com_indices.size:
        result = alternating_optimization(net, a, config)
        if result.feasible:
            return result.allocation
        logger.warning(f"AO returned status {result.status}; falling back to full power")
    return npc_allocation(net, a, config)


def run_drop(config: SystemConfig, scheme: Scheme, seed: int, drop: int) -> DropRecord:
    """Simulate one drop; failures are logged and recorded, never raised"""
    start_time = time.time()
    streams = RandomStreams(seed)
    scheme = Scheme(scheme)

    try:
        net = place_network(
            config,
            streams.generator("placement", drop),
            shadow_rng=streams.generator("shadowing", drop),
        )
        if scheme.greedy:
            outcome = greedy_select(net, config)
        else:
            outcome = random_select(net, config, streams.generator("selection", drop))
        a = outcome.assignment

        allocation = allocate(net, a, scheme, config)
        audit = metrics.audit_allocation(net, a, allocation, config)
        report = metrics.evaluate(net, a, allocation, config)

        # Allocations that fail the audit (including MASR < kappa) report zero SE
        feasible = bool(audit.ok and a.com_indices.size)
        min_se = report.min_se if feasible else 0.0

        logger.info(
            f"Drop {drop} finished: min SE {min_se:.4f} bits/s/Hz",
            extra={
                "drop": drop,
                "scheme": scheme.value,
                "kappa": config.kappa,
                "duration": round((time.time() - start_time) * 1000, 2),
                "status": "feasible" if feasible else "infeasible",
            },
        )
        return DropRecord(
            drop=drop,
            min_se=float(min_se),
            masr=float(report.masr),
            feasible=feasible,
            committed_moves=len(outcome.committed_moves),
            com_aps=int(np.sum(a.a)),
        )

    except Exception as e:
        logger.error(
            f"Drop {drop} failed: {str(e)}",
            extra={"drop": drop, "scheme": scheme.value, "error": str(e), "error_type": type(e).__name__},
            exc_info=True,
        )
        return DropRecord(
            drop=drop,
            min_se=0.0,
            masr=float("nan"),
            feasible=False,
            failed=True,
            error=f"{type(e).__name__}: {e}",
        )


class DropTask:
    """Picklable drop callable for the process pool"""

    def __init__(self, config: SystemConfig, scheme: Scheme, seed: int):
        self.config = config
        self.scheme = Scheme(scheme)
        self.seed = seed

    def __call__(self, drop: int) -> DropRecord:
        return run_drop(self.config, self.scheme, self.seed, drop)
