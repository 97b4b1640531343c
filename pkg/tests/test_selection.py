import numpy as np
import pytest

from app.exceptions import DimensionError
from app.models.config import SystemConfig
from app.models.models import ModeAssignment
from app.services import metrics
from app.services.power import npc_allocation, power_scheme
from app.services.selection import candidate_score, exhaustive_select, greedy_select, improves, random_select
from app.services.streams import RandomStreams
from app.services.topology import place_network
from tests.conftest import random_statistics


def _npc_score(net, a, config):
    p = npc_allocation(net, a, config)
    if metrics.masr(net, a, p, config) < config.kappa:
        return 0.0
    return float(np.min(metrics.sinr_all(net, a, p, config)))


def test_unreachable_masr_keeps_every_ap_sensing():
    net = random_statistics(M=6, K=2, N=2, seed=1)
    # One C-AP at full power already gives MASR = N (M - 1) = 10
    config = SystemConfig(M=6, N=2, K_d=2, kappa=1000.0, rho=10.0)
    outcome = greedy_select(net, config)
    assert outcome.assignment.com_indices.size == 0
    assert outcome.committed_moves == []
    assert len(outcome.trace) == 1
    assert not outcome.trace[0].committed
    assert outcome.trace[0].min_sinr == 0.0


def test_first_move_is_the_best_single_ap():
    net = random_statistics(M=4, K=1, N=2, seed=2)
    config = SystemConfig(M=4, N=2, K_d=1, kappa=0.0, rho=10.0)
    outcome = greedy_select(net, config)

    empty = ModeAssignment.all_sensing(4)
    scores = [_npc_score(net, empty.with_com(m), config) for m in range(4)]
    assert outcome.trace[0].ap == int(np.argmax(scores))
    assert outcome.trace[0].min_sinr == pytest.approx(max(scores))


def test_every_committed_move_is_step_optimal():
    net = random_statistics(M=6, K=2, N=2, seed=3)
    config = SystemConfig(M=6, N=2, K_d=2, kappa=0.5, rho=10.0)
    outcome = greedy_select(net, config)

    a = ModeAssignment.all_sensing(6)
    for step in outcome.trace:
        candidates = a.sen_indices
        scores = [_npc_score(net, a.with_com(m), config) for m in candidates]
        assert step.ap == int(candidates[int(np.argmax(scores))])
        assert step.min_sinr == pytest.approx(max(scores))
        if step.committed:
            a = a.with_com(step.ap)
    assert np.array_equal(a.a, outcome.assignment.a)


def test_greedy_trace_is_increasing_and_masr_holds():
    net = random_statistics(M=8, K=2, N=2, seed=4)
    config = SystemConfig(M=8, N=2, K_d=2, kappa=1.0, rho=10.0)
    outcome = greedy_select(net, config)
    committed = [step.min_sinr for step in outcome.trace if step.committed]
    assert committed[0] > 0
    assert all(b - a >= config.e_min_greedy * a for a, b in zip(committed, committed[1:]))
    if committed:
        a = outcome.assignment
        assert metrics.masr(net, a, npc_allocation(net, a, config), config) >= config.kappa


def test_greedy_never_beats_exhaustive_search():
    net = random_statistics(M=5, K=2, N=2, seed=5)
    config = SystemConfig(M=5, N=2, K_d=2, kappa=0.5, rho=10.0)
    greedy = greedy_select(net, config)
    best = exhaustive_select(net, config)
    assert best.iterations == 2**5 - 1
    assert _npc_score(net, best.assignment, config) >= _npc_score(net, greedy.assignment, config) - 1e-12


def test_exhaustive_search_is_limited_to_small_networks():
    net = random_statistics(M=13, K=1, N=1, seed=0)
    with pytest.raises(ValueError):
        exhaustive_select(net, SystemConfig(M=13, N=1, K_d=1))


def test_random_selection_is_reproducible():
    net = random_statistics(M=20, K=2, N=2, seed=6)
    config = SystemConfig(K_d=2)
    first = random_select(net, config, np.random.default_rng(9))
    second = random_select(net, config, np.random.default_rng(9))
    assert np.array_equal(first.assignment.a, second.assignment.a)
    assert first.trace == ()


def test_scheme_returning_garbage_is_rejected():
    net = random_statistics(M=3, K=1, N=2, seed=7)
    config = SystemConfig(M=3, N=2, K_d=1, kappa=0.0)
    a = ModeAssignment(np.array([1, 0, 0]))
    with pytest.raises(DimensionError):
        candidate_score(net, a, lambda net, a: np.zeros(3), config)


def test_unknown_power_scheme():
    with pytest.raises(ValueError):
        power_scheme("max", SystemConfig())


@pytest.mark.parametrize(
    "score, current, expected",
    [
        (3e-4, 0.0, True),
        (0.0, 0.0, False),
        (1.0005, 1.0, False),
        (1.002, 1.0, True),
        (0.9, 1.0, False),
    ],
)
def test_improvement_is_relative_to_the_current_value(score, current, expected):
    assert improves(score, current, 1e-3) is expected


def test_greedy_leaves_the_all_sensing_start_on_placed_drops():
    # A single weak C-AP against many full-power S-APs scores far below e_min
    config = SystemConfig()
    streams = RandomStreams(0)
    for drop in range(10):
        net = place_network(
            config, streams.generator("placement", drop), shadow_rng=streams.generator("shadowing", drop)
        )
        outcome = greedy_select(net, config)
        assert outcome.committed_moves, f"drop {drop} stayed all-sensing: {outcome.trace}"
        assert outcome.assignment.com_indices.size >= 1


def test_random_selection_is_fair_on_average():
    net = random_statistics(M=20, K=2, N=2, seed=8)
    config = SystemConfig(K_d=2)
    rng = np.random.default_rng(10)
    flags = np.concatenate([random_select(net, config, rng).assignment.a for _ in range(200)])
    assert flags.mean() == pytest.approx(0.5, abs=0.04)
