import math

import numpy as np
import pandas as pd
import pytest

from app.models.config import SystemConfig
from app.models.models import DropRecord, ExperimentResult, Scheme
from app.services import harness


def _result(values, scheme=Scheme.GAP_NPC, kappa=1.0, feasible=None):
    feasible = feasible or [True] * len(values)
    drops = [DropRecord(drop=i, min_se=v, masr=2.0, feasible=f) for i, (v, f) in enumerate(zip(values, feasible))]
    return ExperimentResult(scheme=scheme, kappa=kappa, M=6, N=2, K_d=2, drops=drops)


def test_empirical_cdf_is_nearest_rank():
    cdf = harness.empirical_cdf([0.1, 0.3, 0.2])
    assert cdf == [(0.1, pytest.approx(1 / 3)), (0.2, pytest.approx(2 / 3)), (0.3, 1.0)]


def test_nearest_rank_quantiles():
    samples = list(range(1, 21))
    assert harness.nearest_rank(samples, 0.05) == 1
    assert harness.nearest_rank(samples, 0.5) == 10
    assert harness.nearest_rank(samples, 1.0) == 20
    with pytest.raises(ValueError):
        harness.nearest_rank([], 0.5)
    with pytest.raises(ValueError):
        harness.nearest_rank(samples, 0.0)


def test_summary_counts_infeasible_drops():
    summary = harness.summarize(_result([0.0, 1.0, 2.0], feasible=[False, True, True]))
    assert summary["mean_min_se"] == pytest.approx(1.0)
    assert summary["p95_likely_se"] == 0.0
    assert summary["infeasible_drops"] == 1
    assert summary["Kd"] == 2


def test_emit_csv_writes_cdf_and_summary(tmp_path):
    result = _result([0.5, 0.25, 0.75])
    paths = harness.emit_csv(result, tmp_path)
    assert [p.name for p in paths] == ["cdf_gap-npc.csv", "summary.csv"]

    cdf = pd.read_csv(tmp_path / "cdf_gap-npc.csv")
    assert list(cdf.columns) == harness.CDF_COLUMNS
    assert cdf["min_se_bits_per_hz"].tolist() == [0.25, 0.5, 0.75]
    assert cdf["empirical_cdf"].iloc[-1] == 1.0

    summary = harness.read_summary(tmp_path / "summary.csv")
    assert list(summary.columns) == harness.SUMMARY_COLUMNS
    assert summary.loc[0, "mean_min_se"] == harness.summarize(result)["mean_min_se"]


def test_emit_csv_without_drops_writes_headers_only(tmp_path):
    harness.emit_csv(_result([]), tmp_path)
    assert pd.read_csv(tmp_path / "cdf_gap-npc.csv").empty
    summary = pd.read_csv(tmp_path / "summary.csv")
    assert summary.empty and list(summary.columns) == harness.SUMMARY_COLUMNS


def test_sweep_files_carry_kappa(tmp_path):
    results = [_result([1.0], kappa=5.0), _result([0.5], kappa=10.0)]
    names = [p.name for p in harness.emit_csv(results, tmp_path)]
    assert "cdf_gap-npc_kappa5_M6_N2.csv" in names
    assert "cdf_gap-npc_kappa10_M6_N2.csv" in names
    assert len(pd.read_csv(tmp_path / "summary.csv")) == 2


def test_single_drop_is_deterministic(config):
    first = harness.run_experiment(config, Scheme.GAP_NPC, drops=1)
    second = harness.run_experiment(config, "gap-npc", drops=1)
    assert first.samples.tolist() == second.samples.tolist()
    assert first.drops[0].com_aps == second.drops[0].com_aps
    assert not first.drops[0].failed


def test_schemes_share_networks(config):
    greedy = harness.run_experiment(config, Scheme.GAP_NPC, drops=2)
    random_ = harness.run_experiment(config, Scheme.RAP_NPC, drops=2)
    assert [r.drop for r in greedy.drops] == [0, 1] == [r.drop for r in random_.drops]


def test_zero_drops_rejected(config):
    with pytest.raises(ValueError):
        harness.run_experiment(config, Scheme.GAP_NPC, drops=0)


def test_sweep_needs_divisible_antenna_budget(config):
    with pytest.raises(ValueError):
        harness.sweep_kappa(config, [1.0], antennas=[3], mn=16)
    with pytest.raises(ValueError):
        harness.sweep_kappa(config, [1.0], antennas=[2])


def test_sweep_layouts(config):
    results = harness.sweep_kappa(config, [0.0, 1.0], schemes=[Scheme.GAP_NPC], drops=1, antennas=[1, 2], mn=8)
    assert [(r.M, r.N, r.kappa) for r in results] == [(8, 1, 0.0), (8, 1, 1.0), (4, 2, 0.0), (4, 2, 1.0)]


def test_failed_drops_are_recorded(config, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("solver blew up")

    monkeypatch.setattr("workers.tasks.place_network", broken)
    result = harness.run_experiment(config, Scheme.GAP_NPC, drops=2, threads=1)
    assert result.failed_drops == 2
    assert all(r.error.startswith("RuntimeError") for r in result.drops)
    assert all(math.isnan(r.masr) for r in result.drops)
    assert harness.failure_rate([result, _result([1.0, 1.0])]) == pytest.approx(0.5)


def test_failure_rate_of_nothing():
    assert harness.failure_rate([]) == 0.0


@pytest.mark.slow
def test_worker_processes_do_not_change_results(config):
    serial = harness.run_experiment(config, Scheme.GAP_NPC, drops=3, threads=1)
    parallel = harness.run_experiment(config, Scheme.GAP_NPC, drops=3, threads=2)
    assert serial.samples.tolist() == parallel.samples.tolist()
    assert harness.summarize(serial) == harness.summarize(parallel)


@pytest.mark.slow
def test_optimized_power_beats_full_power_without_sensing_target():
    config = SystemConfig(M=6, N=2, K_d=2, kappa=0.0, seed=3)
    npc = harness.run_experiment(config, Scheme.GAP_NPC, drops=2)
    opc = harness.run_experiment(config, Scheme.GAP_OPC, drops=2)
    assert np.all(opc.samples >= npc.samples - 1e-6)


@pytest.mark.slow
def test_scheme_ordering_at_moderate_scale():
    config = SystemConfig(M=20, N=3, K_d=3, kappa=10.0, seed=5)
    opc, npc, rap = (
        harness.run_experiment(config, scheme, drops=100, threads=4)
        for scheme in (Scheme.GAP_OPC, Scheme.GAP_NPC, Scheme.RAP_NPC)
    )

    wins = np.mean(opc.samples >= npc.samples - 1e-9)
    assert wins >= 0.95
    likely = [harness.summarize(result)["p95_likely_se"] for result in (opc, npc, rap)]
    assert likely[0] >= likely[1] >= likely[2]


@pytest.mark.slow
def test_mean_min_se_falls_as_the_sensing_target_rises():
    config = SystemConfig(M=30, N=2, K_d=3, seed=6)
    kappas = [5.0, 10.0, 15.0, 20.0]
    results = harness.sweep_kappa(config, kappas, drops=20, threads=4)

    for scheme in (Scheme.GAP_OPC, Scheme.GAP_NPC):
        means = [harness.summarize(r)["mean_min_se"] for r in results if r.scheme is scheme]
        assert len(means) == len(kappas)
        assert all(b <= prev * (1 + 1e-9) for prev, b in zip(means, means[1:])), (scheme, means)


@pytest.mark.slow
def test_more_antennas_per_ap_help_at_fixed_total():
    config = SystemConfig(M=30, N=2, K_d=3, seed=7)
    few, many = harness.sweep_kappa(
        config, [10.0], schemes=[Scheme.GAP_OPC], drops=20, antennas=[2, 6], mn=60, threads=4
    )
    assert (few.M, few.N, many.M, many.N) == (30, 2, 10, 6)
    assert np.mean(many.samples >= few.samples) >= 0.8
