"""
Monte Carlo ground truth for the closed-form metrics

Simulates the downlink signal model trial by trial: channels are drawn from the
MMSE posterior, precoders are the conjugate estimates and the sensing beams are
steered at the target. Each user's received signal is split into desired signal
(DS), beamforming uncertainty (BU), inter-user interference (IUI) and sensing
interference (IR), and the use-and-then-forget SINR is formed from their moments.

Trials run in fixed-size batches with one random stream per batch; partial sums
are combined with math.fsum in batch order, so the worker count never changes
the result.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from app.models.config import SystemConfig
from app.models.models import (
    ModeAssignment,
    NetworkRealization,
    OracleEstimate,
    PowerAllocation,
    VerificationReport,
)
from app.services import metrics
from app.services.channel import build_beamformers, complex_normal, draw_channels
from app.services.power import npc_allocation
from app.services.topology import place_network

logger = logging.getLogger(__name__)

BATCH_SIZE = 2000
MIN_TRIALS = 1000


@dataclass
class _BatchSums:
    """First and second moments of one batch, summed over its trials"""

    trials: int
    ds: np.ndarray         # (K,) complex
    ds_sq: np.ndarray      # (K,)
    bu: np.ndarray         # (K,)  sum |BU|^2
    bu_sq: np.ndarray
    iui: np.ndarray        # (K, K)
    iui_sq: np.ndarray
    ir: np.ndarray         # (K,)
    ir_sq: np.ndarray
    p_com: float
    p_com_sq: float
    p_sen: float
    p_sen_sq: float


def _fsum(stack: List[np.ndarray]) -> np.ndarray:
    """Compensated elementwise sum over batches, in batch order"""
    arrays = np.stack([np.asarray(s) for s in stack])
    if np.iscomplexobj(arrays):
        return _fsum([a.real for a in arrays]) + 1j * _fsum([a.imag for a in arrays])
    flat = arrays.reshape(arrays.shape[0], -1)
    return np.array([math.fsum(flat[:, i]) for i in range(flat.shape[1])]).reshape(arrays.shape[1:])


def _batch_plan(trials: int) -> List[int]:
    full, rest = divmod(trials, BATCH_SIZE)
    return [BATCH_SIZE] * full + ([rest] if rest else [])


def _run_batch(
    net: NetworkRealization,
    am: np.ndarray,
    p: PowerAllocation,
    rho: float,
    size: int,
    seed: np.random.SeedSequence,
) -> _BatchSums:
    rng = np.random.default_rng(seed)
    ch = draw_channels(net, rng, batch=size)
    bf = build_beamformers(ch, net)

    # inner[t, m, k, j] = g_mk^T t_mj
    inner = np.einsum("tmkn,tmjn->tmkj", ch.g, bf.t_com)
    weights = am[:, None] * np.sqrt(p.eta_com)               # (M, K)
    gains = np.einsum("tmkj,mj->tkj", inner, weights)         # (T, K, K)

    K = net.K
    ds_closed = net.antennas * np.sum(weights * net.gamma, axis=0)
    desired = gains[:, np.arange(K), np.arange(K)]           # (T, K)
    bu = rho * np.abs(desired - ds_closed) ** 2
    iui = rho * np.abs(gains) ** 2
    iui[:, np.arange(K), np.arange(K)] = 0.0

    sensing_weights = np.sqrt(rho * (1.0 - am) * p.eta_sen)   # (M,)
    sensing_inner = np.einsum("tmkn,mn->tmk", ch.g, bf.t_sen)
    ir = np.abs(np.einsum("tmk,m->tk", sensing_inner, sensing_weights)) ** 2

    # Spatial power pattern towards the target with random data and probing symbols
    data = complex_normal(rng, (size, K))
    probing = complex_normal(rng, (size,))
    x_com = np.sqrt(rho) * np.einsum("tmkn,mk,tk->tmn", bf.t_com, weights, data)
    x_sen = sensing_weights[None, :, None] * bf.t_sen[None, :, :] * probing[:, None, None]
    steering = np.conj(bf.t_sen)   # a^H x with a = t_sen
    p_com = np.sum(am * np.abs(np.einsum("mn,tmn->tm", steering, x_com)) ** 2, axis=1)
    p_sen = np.sum((1.0 - am) * np.abs(np.einsum("mn,tmn->tm", steering, x_sen)) ** 2, axis=1)

    return _BatchSums(
        trials=size,
        ds=np.sum(desired, axis=0),
        ds_sq=np.sum(np.abs(desired) ** 2, axis=0),
        bu=np.sum(bu, axis=0),
        bu_sq=np.sum(bu**2, axis=0),
        iui=np.sum(iui, axis=0),
        iui_sq=np.sum(iui**2, axis=0),
        ir=np.sum(ir, axis=0),
        ir_sq=np.sum(ir**2, axis=0),
        p_com=math.fsum(p_com),
        p_com_sq=math.fsum(p_com**2),
        p_sen=math.fsum(p_sen),
        p_sen_sq=math.fsum(p_sen**2),
    )


def _stderr(mean, mean_sq, trials: int):
    variance = np.clip(np.asarray(mean_sq) - np.abs(np.asarray(mean)) ** 2, 0.0, None)
    return np.sqrt(variance / trials)


def _simulate(
    net: NetworkRealization,
    a: ModeAssignment,
    p: PowerAllocation,
    config: SystemConfig,
    trials: int,
    rng: np.random.Generator,
    workers: int,
) -> OracleEstimate:
    if trials < MIN_TRIALS:
        raise ValueError(f"the oracle needs at least {MIN_TRIALS} trials")
    am = metrics.check_inputs(net, a, p)
    plan = _batch_plan(trials)
    seeds = np.random.SeedSequence(int(rng.integers(2**63))).spawn(len(plan))

    if workers > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(
                lambda job: _run_batch(net, am, p, config.rho, *job), zip(plan, seeds)
            ))
    else:
        batches = [_run_batch(net, am, p, config.rho, size, seed) for size, seed in zip(plan, seeds)]

    def mean(name: str):
        return _fsum([getattr(b, name) for b in batches]) / trials

    ds, ds_sq = mean("ds"), mean("ds_sq")
    bu, bu_sq = mean("bu"), mean("bu_sq")
    iui, iui_sq = mean("iui"), mean("iui_sq")
    ir, ir_sq = mean("ir"), mean("ir_sq")
    p_com, p_com_sq = float(mean("p_com")), float(mean("p_com_sq"))
    p_sen, p_sen_sq = float(mean("p_sen")), float(mean("p_sen_sq"))

    ds_closed = net.antennas * np.sum(am[:, None] * np.sqrt(p.eta_com) * net.gamma, axis=0)
    sinr_mc = config.rho * np.abs(ds) ** 2 / (bu + np.sum(iui, axis=1) + ir + 1.0)

    return OracleEstimate(
        ds=ds,
        ds_closed=ds_closed,
        bu_var=bu,
        iui_var=iui,
        ir_var=ir,
        sinr_mc=sinr_mc,
        pattern_mc=(p_com, p_sen),
        trials=trials,
        stderr={
            "ds": _stderr(ds, ds_sq, trials),
            "bu_var": _stderr(bu, bu_sq, trials),
            "iui_var": _stderr(iui, iui_sq, trials),
            "ir_var": _stderr(ir, ir_sq, trials),
            "p_com": float(_stderr(p_com, p_com_sq, trials)),
            "p_sen": float(_stderr(p_sen, p_sen_sq, trials)),
        },
    )


def estimate_sinr_terms(
    net: NetworkRealization,
    a: ModeAssignment,
    p: PowerAllocation,
    config: SystemConfig,
    trials: int,
    rng: np.random.Generator,
    workers: int = 1,
) -> OracleEstimate:
    """Monte Carlo DS/BU/IUI/IR moments, empirical SINR and power pattern"""
    estimate = _simulate(net, a, p, config, trials, rng, workers)
    logger.debug("Oracle estimate finished", extra={"trials": trials})
    return estimate


def estimate_power_pattern(
    net: NetworkRealization,
    a: ModeAssignment,
    p: PowerAllocation,
    config: SystemConfig,
    trials: int,
    rng: np.random.Generator,
    workers: int = 1,
) -> Tuple[float, float]:
    """Empirical (p_com, p_sen) of the average spatial power pattern at the target"""
    return _simulate(net, a, p, config, trials, rng, workers).pattern_mc


def closed_form_terms(net: NetworkRealization, a: ModeAssignment, p: PowerAllocation, config: SystemConfig) -> Dict:
    """Analytic counterparts of every oracle statistic"""
    am = metrics.check_inputs(net, a, p)
    rho, N = config.rho, net.antennas
    weights = am[:, None] * p.eta_com * net.gamma                # a_m eta_mj gamma_mj
    iui = rho * N * (net.beta.T @ weights)                        # [k, j]
    bu = np.diag(iui).copy()
    np.fill_diagonal(iui, 0.0)
    return {
        "ds": N * np.sum(am[:, None] * np.sqrt(p.eta_com) * net.gamma, axis=0),
        "bu_var": bu,
        "iui_var": iui,
        "ir_var": rho * (((1.0 - am) * p.eta_sen) @ net.beta),
        "sinr": metrics.sinr_all(net, a, p, config),
        "pattern": metrics.power_pattern(net, a, p, config),
    }


def _relative(estimate: float, reference: float) -> float:
    if reference == 0:
        return 0.0 if abs(estimate) == 0 else math.inf
    return abs(estimate - reference) / abs(reference)


def verify_instance(
    net: NetworkRealization,
    a: ModeAssignment,
    p: PowerAllocation,
    config: SystemConfig,
    trials: int,
    rng: np.random.Generator,
    tolerance: float = 0.03,
    workers: int = 1,
) -> VerificationReport:
    """Relative error of every closed form against its Monte Carlo estimate"""
    estimate = estimate_sinr_terms(net, a, p, config, trials, rng, workers)
    closed = closed_form_terms(net, a, p, config)
    errors: Dict[str, float] = {}

    for k in range(net.K):
        errors[f"ds[{k}]"] = _relative(float(estimate.ds[k].real), float(closed["ds"][k]))
        errors[f"bu[{k}]"] = _relative(float(estimate.bu_var[k]), float(closed["bu_var"][k]))
        if net.K > 1:
            errors[f"iui[{k}]"] = _relative(
                float(np.sum(estimate.iui_var[k])), float(np.sum(closed["iui_var"][k]))
            )
        errors[f"ir[{k}]"] = _relative(float(estimate.ir_var[k]), float(closed["ir_var"][k]))
        errors[f"sinr[{k}]"] = _relative(float(estimate.sinr_mc[k]), float(closed["sinr"][k]))
    errors["p_com"] = _relative(estimate.pattern_mc[0], closed["pattern"][0])
    errors["p_sen"] = _relative(estimate.pattern_mc[1], closed["pattern"][1])

    return VerificationReport(relative_errors=errors, tolerance=tolerance, trials=trials)


def random_instance(
    config: SystemConfig,
    rng: np.random.Generator,
) -> Tuple[NetworkRealization, ModeAssignment, PowerAllocation]:
    """One drop with a random mixed mode vector (at least one AP of each kind when M >= 2) and NPC powers"""
    net = place_network(config, rng)
    a = (rng.random(net.M) < 0.5).astype(np.int8)
    if net.M >= 2:
        order = rng.permutation(net.M)
        a[order[0]] = 1
        a[order[1]] = 0
    else:
        a[:] = 1
    assignment = ModeAssignment(a)
    return net, assignment, npc_allocation(net, assignment, config)


def verify_drops(
    config: SystemConfig,
    instances: int,
    trials: int,
    rng: np.random.Generator,
    tolerance: float = 0.03,
    workers: int = 1,
) -> List[VerificationReport]:
    """Oracle acceptance suite over several random NPC instances"""
    reports = []
    for index in range(instances):
        net, a, p = random_instance(config, rng)
        report = verify_instance(net, a, p, config, trials, rng, tolerance, workers)
        name, worst = report.worst
        logger.info(
            f"Instance {index}: worst relative error {worst:.4f} ({name})",
            extra={"drop": index, "trials": trials, "status": "pass" if report.passed else "fail"},
        )
        reports.append(report)
    return reports
