import math

import numpy as np
import pytest

from app.exceptions import DimensionError
from app.models.config import SystemConfig
from app.models.models import ModeAssignment, NetworkRealization, PowerAllocation
from app.services import metrics


@pytest.fixture
def pattern_net():
    return NetworkRealization.from_statistics(beta=[[1.0], [1.0]], gamma=[[0.5], [0.5]], antennas=2)


def test_single_link_sinr(single_link, unit_config):
    p = PowerAllocation(np.array([[1.0]]), np.array([0.0]))
    sinr = metrics.sinr_closed_form(single_link, ModeAssignment(np.array([1])), p, 0, unit_config)
    assert sinr == pytest.approx(10 / 11)


def test_zero_power_gives_zero_sinr(single_link, unit_config):
    p = PowerAllocation.zeros(1, 1)
    assert metrics.sinr_closed_form(single_link, ModeAssignment(np.array([1])), p, 0, unit_config) == 0.0


def test_sinr_matches_term_by_term_evaluation(mixed_pair, unit_config):
    net, a = mixed_pair
    p = PowerAllocation(np.array([[0.6, 0.8], [0.0, 0.0]]), np.array([0.0, 0.7]))
    rho, N = unit_config.rho, net.antennas
    expected = []
    for k in range(net.K):
        ds = N * math.sqrt(p.eta_com[0, k]) * net.gamma[0, k]
        com = N * net.beta[0, k] * sum(p.eta_com[0, j] * net.gamma[0, j] for j in range(net.K))
        sen = p.eta_sen[1] * net.beta[1, k]
        expected.append(rho * ds**2 / (rho * com + rho * sen + 1.0))
    assert metrics.sinr_all(net, a, p, unit_config) == pytest.approx(expected)


def test_user_index_out_of_range(single_link, unit_config):
    with pytest.raises(DimensionError):
        metrics.sinr_closed_form(single_link, ModeAssignment(np.array([1])), PowerAllocation.zeros(1, 1), 1, unit_config)


def test_shape_mismatch_is_rejected(single_link, unit_config):
    with pytest.raises(DimensionError):
        metrics.sinr_all(single_link, ModeAssignment(np.array([1, 0])), PowerAllocation.zeros(2, 1), unit_config)
    with pytest.raises(DimensionError):
        metrics.sinr_all(single_link, ModeAssignment(np.array([1])), PowerAllocation.zeros(1, 2), unit_config)


def test_spectral_efficiency(unit_config):
    assert metrics.spectral_efficiency(0.0, unit_config) == 0.0
    assert metrics.spectral_efficiency(1.0, unit_config) == pytest.approx(0.975)

    half = SystemConfig(K_d=1, tau=200, tau_t=100)
    assert metrics.spectral_efficiency(3.0, half) == pytest.approx(1.0)
    assert metrics.spectral_efficiency(np.array([0.0, 1.0]), unit_config) == pytest.approx([0.0, 0.975])

    with pytest.raises(ValueError):
        metrics.spectral_efficiency(-0.1, unit_config)


def test_power_pattern(pattern_net):
    config = SystemConfig(rho=1.0, K_d=1)
    a = ModeAssignment(np.array([1, 0]))
    p = PowerAllocation(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]))
    assert metrics.power_pattern(pattern_net, a, p, config) == pytest.approx((0.5, 1.0))
    assert metrics.power_pattern(pattern_net, a, PowerAllocation.zeros(2, 1), config) == (0.0, 0.0)


def test_no_sensing_power_without_sensing_aps(pattern_net):
    config = SystemConfig(rho=1.0, K_d=1)
    a = ModeAssignment(np.array([1, 1]))
    p = PowerAllocation(np.array([[1.0], [1.0]]), np.array([1.0, 1.0]))
    assert metrics.power_pattern(pattern_net, a, p, config)[1] == 0.0


def test_masr(pattern_net):
    a = ModeAssignment(np.array([1, 0]))
    p = PowerAllocation(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]))
    assert metrics.masr(pattern_net, a, p) == pytest.approx(2.0)
    assert metrics.masr_margin(pattern_net, a, p, 2.0) == pytest.approx(0.0)
    assert metrics.masr_margin(pattern_net, a, p, 3.0) == pytest.approx(-0.5)


def test_masr_edge_cases(pattern_net):
    sensing = ModeAssignment.all_sensing(2)
    p = PowerAllocation(np.zeros((2, 1)), np.array([0.3, 1.0]))
    assert metrics.masr(pattern_net, sensing, p) == math.inf
    assert metrics.masr(pattern_net, sensing, PowerAllocation.zeros(2, 1)) == 0.0


def test_audit_accepts_a_feasible_point(pattern_net):
    config = SystemConfig(K_d=1, kappa=2.0)
    a = ModeAssignment(np.array([1, 0]))
    p = PowerAllocation(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]))
    audit = metrics.audit_allocation(pattern_net, a, p, config)
    assert audit.ok
    assert audit.per_ap_cap_slack == pytest.approx([0.0, 0.5])
    assert audit.masr_slack == pytest.approx(0.0)


def test_audit_flags_every_violation(pattern_net):
    config = SystemConfig(K_d=1, kappa=5.0)
    a = ModeAssignment(np.array([1, 0]))
    p = PowerAllocation(np.array([[1.2], [0.0]]), np.array([0.0, 1.5]))
    audit = metrics.audit_allocation(pattern_net, a, p, config)
    assert not audit.ok
    assert len(audit.violations) == 3
    assert any("exceeds 1/N" in v for v in audit.violations)
    assert any("MASR" in v for v in audit.violations)


def test_constraint_slacks(pattern_net):
    a = ModeAssignment(np.array([1, 0]))
    p = PowerAllocation(np.array([[0.5], [0.0]]), np.array([0.0, 0.25]))
    assert metrics.constraint_slacks(pattern_net, a, p) == pytest.approx([-0.0, 0.5])


def test_evaluate_report(single_link, unit_config):
    a = ModeAssignment(np.array([1]))
    p = PowerAllocation(np.array([[1.0]]), np.array([0.0]))
    report = metrics.evaluate(single_link, a, p, unit_config)
    assert report.min_sinr == pytest.approx(10 / 11)
    assert report.min_se == pytest.approx(0.975 * math.log2(1 + 10 / 11))
    assert report.masr == 0.0
    assert report.to_dict()["se"] == pytest.approx([report.min_se])
