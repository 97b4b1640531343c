import numpy as np
import pytest

from app.models.config import SystemConfig
from app.models.models import ModeAssignment, NetworkRealization
from app.services.feasibility import (
    FEASIBLE,
    INFEASIBLE,
    AdmmSolver,
    ComFeasibilityProblem,
    SenFeasibilityProblem,
    assemble_cone_program,
    dump_problem,
    max_min_upper_bound,
    project_soc,
    repair_com_point,
    solve_feasibility,
    verify_com_point,
    verify_sen_point,
)
from tests.conftest import random_statistics

# rho N gamma / (rho beta + 1) for the single-link fixture with rho = 10
SINGLE_LINK_THRESHOLD = 10 * 2 * 0.5 / (10 * 1.0 + 1)


def _com_problem(net, a, eta_sen, t, config):
    return ComFeasibilityProblem.build(net, a, np.asarray(eta_sen, dtype=float), t, config)


def test_project_soc_cases():
    t, v = project_soc(np.array([2.0, -3.0, 0.0]), np.array([[1.0, 0.0], [1.0, 1.0], [3.0, 4.0]]))
    assert t[0] == 2.0 and np.allclose(v[0], [1.0, 0.0])          # inside
    assert t[1] == 0.0 and np.allclose(v[1], 0.0)                 # polar cone
    assert t[2] == pytest.approx(2.5)                              # boundary projection
    assert np.linalg.norm(v[2]) == pytest.approx(2.5)


def test_zero_level_is_trivially_feasible(single_link, unit_config):
    a = ModeAssignment(np.array([1]))
    outcome = solve_feasibility(_com_problem(single_link, a, [0.0], 0.0, unit_config), unit_config)
    assert outcome.feasible
    assert np.all(outcome.point == 0)


def test_single_link_threshold(single_link, unit_config):
    a = ModeAssignment(np.array([1]))
    below = solve_feasibility(_com_problem(single_link, a, [0.0], 0.99 * SINGLE_LINK_THRESHOLD, unit_config), unit_config)
    above = solve_feasibility(_com_problem(single_link, a, [0.0], 1.01 * SINGLE_LINK_THRESHOLD, unit_config), unit_config)
    assert below.status == FEASIBLE
    assert below.point[0, 0] * 0.5 <= 0.5 * (1 + 1e-6)
    assert not above.feasible
    assert above.status != FEASIBLE


def test_masr_budget_makes_the_program_infeasible():
    net = NetworkRealization.from_statistics(beta=[[1.0], [1.0]], gamma=[[0.5], [0.5]], antennas=2)
    config = SystemConfig(rho=10.0, K_d=1, kappa=1e6)
    a = ModeAssignment(np.array([1, 0]))
    problem = _com_problem(net, a, [0.0, 0.0], 0.1, config)
    assert problem.masr_radius == 0.0
    assert solve_feasibility(problem, config).status == INFEASIBLE


def test_upper_bound_is_not_below_the_single_link_optimum(single_link, unit_config):
    problem = _com_problem(single_link, ModeAssignment(np.array([1])), [0.0], 0.0, unit_config)
    assert max_min_upper_bound(problem) >= SINGLE_LINK_THRESHOLD


def test_literal_mode_changes_the_weights(single_link):
    config = SystemConfig(rho=10.0, K_d=1, kappa=0.0, literal_constraint_21d=True)
    problem = _com_problem(single_link, ModeAssignment(np.array([1])), [0.0], 0.5, config)
    assert np.all(problem.weights == 1.0)


def test_repair_enforces_caps(mixed_pair):
    net, a = mixed_pair
    config = SystemConfig(rho=10.0, K_d=2, kappa=2.0)
    problem = _com_problem(net, a, [0.0, 0.3], 0.1, config)
    theta, upsilon = repair_com_point(problem, np.array([[3.0, -1.0]]))
    assert np.all(theta >= 0)
    assert np.all(upsilon <= problem.power_cap + 1e-12)
    assert 2.0 * np.sum(upsilon**2) <= 0.3 * (1 + 1e-12)


def test_verify_com_point_reports_unmet_targets(single_link, unit_config):
    problem = _com_problem(single_link, ModeAssignment(np.array([1])), [0.0], 5.0, unit_config)
    violations = verify_com_point(problem, np.array([[0.1]]), np.array([0.1]), 1e-6)
    assert any("SINR target" in v for v in violations)


def test_cone_program_layout(mixed_pair):
    net, a = mixed_pair
    config = SystemConfig(rho=10.0, K_d=2, kappa=1.0)
    program = assemble_cone_program(_com_problem(net, a, [0.0, 0.5], 0.2, config))
    nC, K = 1, 2
    assert program.n == nC * K + nC + 1
    total_rows = program.n + sum(count * dim for _, count, dim in program.cones)
    assert program.A.shape == (total_rows, program.n)


def test_admm_brackets_the_upper_bound(mixed_pair):
    net, a = mixed_pair
    config = SystemConfig(rho=10.0, K_d=2, kappa=0.5)
    eta_sen = [0.0, 1.0]
    t_max = max_min_upper_bound(_com_problem(net, a, eta_sen, 0.0, config))
    solver = AdmmSolver(check_tolerance=config.check_tolerance)
    low = solver.solve(_com_problem(net, a, eta_sen, 1e-3 * t_max, config))
    assert low.feasible
    assert solver.solve(_com_problem(net, a, eta_sen, 1.01 * t_max, config)).status != FEASIBLE


def test_sensing_program_meets_the_masr_requirement():
    net = NetworkRealization.from_statistics(beta=[[1.0], [0.5], [0.5]], gamma=[[0.5], [0.25], [0.25]], antennas=2)
    config = SystemConfig(rho=10.0, K_d=1, kappa=1.0)
    a = ModeAssignment(np.array([1, 0, 0]))
    eta_com = np.array([[1.0], [0.0], [0.0]])
    problem = SenFeasibilityProblem.build(net, a, eta_com, 0.5, config)
    assert problem.required_power == pytest.approx(0.5)

    outcome = solve_feasibility(problem, config)
    assert outcome.feasible
    assert np.sum(outcome.point) == pytest.approx(0.5, rel=1e-6)
    assert outcome.point[0] == 0.0
    assert verify_sen_point(problem, outcome.point[1:], 1e-6) == []


def test_sensing_program_without_sensing_aps():
    net = NetworkRealization.from_statistics(beta=[[1.0]], gamma=[[0.5]], antennas=2)
    a = ModeAssignment(np.array([1]))
    eta_com = np.array([[1.0]])
    free = SystemConfig(K_d=1, kappa=0.0)
    assert solve_feasibility(SenFeasibilityProblem.build(net, a, eta_com, 0.5, free), free).feasible

    demanding = SystemConfig(K_d=1, kappa=1.0)
    assert not solve_feasibility(SenFeasibilityProblem.build(net, a, eta_com, 0.5, demanding), demanding).feasible


def test_unsupported_problem_kind():
    with pytest.raises(TypeError):
        solve_feasibility(object(), SystemConfig())


def test_dump_problem(tmp_path, mixed_pair):
    net, a = mixed_pair
    config = SystemConfig(rho=10.0, K_d=2, kappa=1.0)
    path = dump_problem(_com_problem(net, a, [0.0, 0.5], 0.2, config), tmp_path / "com.txt")
    text = path.read_text()
    assert text.startswith("kind = com")
    assert "soc " in text

    sen = SenFeasibilityProblem.build(net, a, np.array([[0.5, 0.5], [0.0, 0.0]]), 0.1, config)
    assert "kind = sen" in dump_problem(sen, tmp_path / "sen.txt").read_text()


def test_dump_dir_collects_problems(tmp_path):
    net = random_statistics(M=3, K=1, N=2, seed=1)
    config = SystemConfig(M=3, N=2, K_d=1, kappa=0.0, rho=10.0, dump_dir=str(tmp_path / "dumps"))
    a = ModeAssignment(np.array([1, 0, 0]))
    solve_feasibility(_com_problem(net, a, [0.0, 1.0, 1.0], 0.01, config), config)
    assert len(list((tmp_path / "dumps").glob("com-*.txt"))) == 1
