"""
AP operation-mode selection

Greedy: start with every AP sensing and repeatedly move the single AP whose
switch to communication gives the largest min-SINR, as long as the relative
gain over the current min-SINR is at least e_min. From the all-sensing start
(min-SINR 0) any positive score is a gain. A candidate that breaks the MASR
requirement scores zero.
"""

import itertools
import logging
from typing import Optional

import numpy as np

from app.exceptions import DimensionError
from app.models.config import SystemConfig
from app.models.models import GreedyStep, ModeAssignment, NetworkRealization, PowerAllocation, SelectionOutcome
from app.services import metrics
from app.services.power import PowerScheme, power_scheme

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_APS = 12


def candidate_score(
    net: NetworkRealization,
    a: ModeAssignment,
    scheme: PowerScheme,
    config: SystemConfig,
) -> float:
    """Min-SINR of an assignment under the scheme's powers, 0 when the MASR falls short"""
    allocation = scheme(net, a)
    if not isinstance(allocation, PowerAllocation):
        raise DimensionError(f"power scheme returned {type(allocation).__name__}, expected PowerAllocation")
    allocation.check_shape(net.M, net.K)
    if metrics.masr(net, a, allocation, config) < config.kappa:
        return 0.0
    return float(np.min(metrics.sinr_all(net, a, allocation, config)))


def improves(score: float, current: float, e_min: float) -> bool:
    """Relative stopping rule: score beats current by at least e_min * current"""
    return score > current and score - current >= e_min * current


def greedy_select(
    net: NetworkRealization,
    config: SystemConfig,
    scheme: Optional[PowerScheme] = None,
) -> SelectionOutcome:
    scheme = scheme or power_scheme(config.greedy_power_scheme, config)
    a = ModeAssignment.all_sensing(net.M)
    current = 0.0
    trace = []

    while a.sen_indices.size:
        candidates = a.sen_indices
        scores = np.array([candidate_score(net, a.with_com(m), scheme, config) for m in candidates])
        # argmax returns the first maximum, i.e. the lowest AP index on ties
        choice = int(np.argmax(scores))
        ap, score = int(candidates[choice]), float(scores[choice])

        if not improves(score, current, config.e_min_greedy):
            trace.append(GreedyStep(ap=ap, min_sinr=score, committed=False))
            break
        a = a.with_com(ap)
        current = score
        trace.append(GreedyStep(ap=ap, min_sinr=score, committed=True))
        logger.debug(f"Greedy moved AP {ap} to communication, min SINR {score:.6g}")

    return SelectionOutcome(assignment=a, trace=tuple(trace), iterations=len(trace))


def random_select(net: NetworkRealization, config: SystemConfig, rng: np.random.Generator) -> SelectionOutcome:
    """Each AP communicates with probability 1/2, independently"""
    a = (rng.random(net.M) < 0.5).astype(np.int8)
    return SelectionOutcome(assignment=ModeAssignment(a))


def exhaustive_select(
    net: NetworkRealization,
    config: SystemConfig,
    scheme: Optional[PowerScheme] = None,
) -> SelectionOutcome:
    """Best of all 2^M assignments; reference for tiny instances only"""
    if net.M > MAX_EXHAUSTIVE_APS:
        raise ValueError(f"exhaustive selection is limited to M <= {MAX_EXHAUSTIVE_APS}")
    scheme = scheme or power_scheme(config.greedy_power_scheme, config)

    best_a = ModeAssignment.all_sensing(net.M)
    best_score = 0.0
    for flags in itertools.product((0, 1), repeat=net.M):
        if not any(flags):
            continue
        a = ModeAssignment(np.array(flags, dtype=np.int8))
        score = candidate_score(net, a, scheme, config)
        if score > best_score:
            best_a, best_score = a, score
    return SelectionOutcome(assignment=best_a, iterations=2**net.M - 1)
