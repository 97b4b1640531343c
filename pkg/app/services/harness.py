"""
Experiment driver: Monte Carlo drops over the three pipelines, CDFs, summaries
and CSV output.

Drops are independent and may run in worker processes; every aggregate is a
fold over the drop records sorted by drop index, so the thread count never
changes a number.
"""

import logging
import math
import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from app.models.config import SystemConfig
from app.models.models import ExperimentResult, Scheme
from workers.pool import run_drops
from workers.tasks import DropTask

logger = logging.getLogger(__name__)

CDF_COLUMNS = ["min_se_bits_per_hz", "empirical_cdf"]
SUMMARY_COLUMNS = ["scheme", "kappa", "M", "N", "Kd", "drops", "mean_min_se", "p95_likely_se", "infeasible_drops"]


def run_experiment(
    config: SystemConfig,
    scheme: Union[Scheme, str],
    drops: Optional[int] = None,
    seed: Optional[int] = None,
    threads: int = 1,
) -> ExperimentResult:
    """
    Run ``drops`` independent drops of one pipeline

    Drop d uses the random streams (seed, purpose, d), so two schemes run with
    the same seed see the same networks.
    """
    scheme = Scheme(scheme)
    drops = config.drops if drops is None else drops
    seed = config.seed if seed is None else seed
    if drops < 1:
        raise ValueError("drops must be >= 1")

    start_time = time.time()
    records = run_drops(DropTask(config, scheme, seed), range(drops), threads)
    result = ExperimentResult(
        scheme=scheme,
        kappa=config.kappa,
        M=config.M,
        N=config.N,
        K_d=config.K_d,
        drops=sorted(records, key=lambda record: record.drop),
        wall_time=time.time() - start_time,
    )
    logger.info(
        f"Experiment {scheme.value} finished: {drops} drops, {result.failed_drops} failed",
        extra={"scheme": scheme.value, "kappa": config.kappa, "duration": round(result.wall_time * 1000, 2)},
    )
    return result


def empirical_cdf(samples: Iterable[float]) -> List[Tuple[float, float]]:
    """Nearest-rank empirical CDF: the i-th smallest of n samples maps to i/n"""
    values = sorted(float(v) for v in samples)
    n = len(values)
    return [(value, (i + 1) / n) for i, value in enumerate(values)]


def nearest_rank(samples: Iterable[float], q: float) -> float:
    """Nearest-rank q-quantile, q in (0, 1]"""
    values = sorted(float(v) for v in samples)
    if not values:
        raise ValueError("no samples")
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    rank = max(1, math.ceil(q * len(values)))
    return values[rank - 1]


def summarize(result: ExperimentResult) -> Dict:
    samples = result.samples
    return {
        "scheme": result.scheme.value,
        "kappa": float(result.kappa),
        "M": result.M,
        "N": result.N,
        "Kd": result.K_d,
        "drops": len(result.drops),
        "mean_min_se": math.fsum(samples) / len(samples),
        "p95_likely_se": nearest_rank(samples, 0.05),
        "infeasible_drops": result.infeasible_drops,
    }


def emit_csv(results: Union[ExperimentResult, Sequence[ExperimentResult]], out_dir) -> List[Path]:
    """
    Write ``cdf_<scheme>.csv`` per result and one ``summary.csv``

    Several results of the same scheme (a kappa sweep) get the kappa in the CDF file name.
    """
    if isinstance(results, ExperimentResult):
        results = [results]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    counts: Dict[str, int] = {}
    for result in results:
        counts[result.scheme.value] = counts.get(result.scheme.value, 0) + 1

    written = []
    rows = []
    for result in results:
        name = result.scheme.value
        if counts[name] > 1:
            name = f"{name}_kappa{result.kappa:g}_M{result.M}_N{result.N}"
        cdf = pd.DataFrame(empirical_cdf(result.samples), columns=CDF_COLUMNS)
        path = out_dir / f"cdf_{name}.csv"
        cdf.to_csv(path, index=False)
        written.append(path)
        if result.drops:
            rows.append(summarize(result))

    summary_path = out_dir / "summary.csv"
    pd.DataFrame(rows, columns=SUMMARY_COLUMNS).to_csv(summary_path, index=False)
    written.append(summary_path)
    return written


def read_summary(path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def sweep_kappa(
    config: SystemConfig,
    kappas: Sequence[float],
    schemes: Sequence[Union[Scheme, str]] = (Scheme.GAP_OPC, Scheme.GAP_NPC),
    drops: Optional[int] = None,
    seed: Optional[int] = None,
    antennas: Optional[Sequence[int]] = None,
    mn: Optional[int] = None,
    threads: int = 1,
) -> List[ExperimentResult]:
    """
    Mean min-SE against the MASR target

    With ``antennas`` and ``mn`` the sweep also scans N at a fixed total antenna
    count M*N (M = mn // N).
    """
    layouts = [(config.M, config.N)]
    if antennas:
        if mn is None:
            raise ValueError("scanning antennas needs mn (total antenna count)")
        layouts = []
        for N in antennas:
            if mn % N:
                raise ValueError(f"mn={mn} is not divisible by N={N}")
            layouts.append((mn // N, N))

    results = []
    for M, N in layouts:
        for kappa in kappas:
            scenario = config.with_overrides(M=M, N=N, kappa=float(kappa))
            for scheme in schemes:
                results.append(run_experiment(scenario, scheme, drops, seed, threads))
    return results


def failure_rate(results: Sequence[ExperimentResult]) -> float:
    drops = sum(len(r.drops) for r in results)
    failed = sum(r.failed_drops for r in results)
    return failed / drops if drops else 0.0


