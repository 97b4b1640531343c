"""
Convex feasibility programs behind the power-control bisections

Two problem kinds:

* ``ComFeasibilityProblem``: communication coefficients at a fixed max-min
  SINR level t, sensing coefficients fixed. Second-order cone program.
* ``SenFeasibilityProblem``: sensing coefficients at a fixed level, communication
  coefficients fixed. Linear program.

``solve_feasibility`` dispatches on the problem kind and the configured backend.
Whatever a backend returns is repaired onto the simple constraints and then
re-checked by ``verify_com_point`` / ``verify_sen_point``, which evaluate the
constraint formulas directly and share no code with the solvers.

Communication variables are normalized: phi_mk = sqrt(w_mk) theta_mk with
w = gamma (w = 1 when ``literal_constraint_21d`` is set), so the per-AP cap
reads ||phi_m|| <= upsilon_m <= 1/sqrt(N) and every variable is O(1).
"""

import logging
import math
import uuid
from dataclasses import dataclass, field
from functools import cached_property, singledispatch
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import linprog

from app.exceptions import SolverError
from app.models.config import SystemConfig
from app.models.models import ModeAssignment, NetworkRealization

logger = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
STALLED = "stalled"
ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class FeasibilityOutcome:
    feasible: bool
    status: str
    point: Optional[np.ndarray] = None   # eta_com (M, K) or eta_sen (M,)
    iterations: int = 0
    residual: float = 0.0
    warm_start: Optional[np.ndarray] = None
    violations: Tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Problem definitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComFeasibilityProblem:
    """Is min-SINR >= t reachable with the given sensing powers?"""

    t: float
    gamma: np.ndarray          # (nC, K) rows of the C-APs
    beta: np.ndarray           # (nC, K)
    psi: np.ndarray            # (K,) sensing interference plus noise, scaled by 1/(rho N^2)
    sen_power: float           # sum of the fixed sensing coefficients
    kappa: float
    antennas: int
    com_indices: np.ndarray
    M: int
    literal_constraint_21d: bool = False

    @classmethod
    def build(
        cls,
        net: NetworkRealization,
        a: ModeAssignment,
        eta_sen: np.ndarray,
        t: float,
        config: SystemConfig,
    ) -> "ComFeasibilityProblem":
        com, sen = a.com_indices, a.sen_indices
        N = net.antennas
        eta_sen = np.asarray(eta_sen, dtype=float)
        sensing_interference = eta_sen[sen] @ net.beta[sen] if sen.size else np.zeros(net.K)
        psi = sensing_interference / N**2 + 1.0 / (config.rho * N**2)
        return cls(
            t=float(t),
            gamma=net.gamma[com],
            beta=net.beta[com],
            psi=psi,
            sen_power=float(math.fsum(eta_sen[sen])),
            kappa=config.kappa,
            antennas=N,
            com_indices=com,
            M=net.M,
            literal_constraint_21d=config.literal_constraint_21d,
        )

    @property
    def nC(self) -> int:
        return self.gamma.shape[0]

    @property
    def K(self) -> int:
        return self.gamma.shape[1]

    @cached_property
    def weights(self) -> np.ndarray:
        if self.literal_constraint_21d:
            return np.ones_like(self.gamma)
        return np.where(self.gamma > 0, self.gamma, 1.0)

    @cached_property
    def signal(self) -> np.ndarray:
        """Coefficient of phi_mk in user k's coherent gain sum_m theta_mk gamma_mk"""
        return self.gamma / np.sqrt(self.weights)

    @cached_property
    def interference(self) -> np.ndarray:
        return np.sqrt(self.beta / self.antennas)

    @property
    def masr_radius(self) -> Optional[float]:
        """Bound on ||upsilon|| from the MASR requirement, None when kappa = 0"""
        if self.kappa <= 0:
            return None
        return math.sqrt(self.sen_power / self.kappa)

    @property
    def power_cap(self) -> float:
        return 1.0 / math.sqrt(self.antennas)

    def theta_from_phi(self, phi: np.ndarray) -> np.ndarray:
        theta = phi / np.sqrt(self.weights)
        if not self.literal_constraint_21d:
            theta = np.where(self.gamma > 0, theta, 0.0)
        return theta

    def eta_com(self, theta: np.ndarray) -> np.ndarray:
        eta = np.zeros((self.M, self.K))
        eta[self.com_indices] = theta**2
        return eta


@dataclass(frozen=True)
class SenFeasibilityProblem:
    """Is min-SINR >= level reachable with the given communication powers?"""

    level: float
    beta: np.ndarray            # (nS, K) rows of the S-APs
    budget: np.ndarray          # (K,) allowed sum_m eta_m beta_mk, +inf when level = 0
    required_power: float       # kappa * sum of C-AP effective powers
    sen_indices: np.ndarray
    M: int

    @classmethod
    def build(
        cls,
        net: NetworkRealization,
        a: ModeAssignment,
        eta_com: np.ndarray,
        level: float,
        config: SystemConfig,
    ) -> "SenFeasibilityProblem":
        com, sen = a.com_indices, a.sen_indices
        N = net.antennas
        eta_com = np.asarray(eta_com, dtype=float)
        coherent = np.sqrt(eta_com[com]) * net.gamma[com]
        gain = np.sum(coherent, axis=0)
        ap_power = np.sum(eta_com[com] * net.gamma[com], axis=1)
        com_interference = ap_power @ net.beta[com] if com.size else np.zeros(net.K)

        if level > 0:
            budget = N**2 * gain**2 / level - N * com_interference - 1.0 / config.rho
        else:
            budget = np.full(net.K, np.inf)
        return cls(
            level=float(level),
            beta=net.beta[sen],
            budget=budget,
            required_power=config.kappa * float(math.fsum(ap_power)),
            sen_indices=sen,
            M=net.M,
        )

    @property
    def nS(self) -> int:
        return self.beta.shape[0]

    def eta_sen(self, values: np.ndarray) -> np.ndarray:
        eta = np.zeros(self.M)
        eta[self.sen_indices] = values
        return eta


# ---------------------------------------------------------------------------
# Independent constraint evaluators
# ---------------------------------------------------------------------------


def verify_com_point(
    problem: ComFeasibilityProblem,
    theta: np.ndarray,
    upsilon: np.ndarray,
    tol: float,
) -> List[str]:
    """Evaluate every constraint of the communication program; returns the violated ones"""
    violations = []
    theta = np.asarray(theta, dtype=float)
    upsilon = np.asarray(upsilon, dtype=float)

    if np.any(theta < 0) or np.any(upsilon < 0):
        violations.append("negative variable")

    ap_power = np.sum(theta**2 * problem.weights, axis=1)
    for m in np.flatnonzero(ap_power > upsilon**2 * (1.0 + tol) + 1e-300):
        violations.append(f"per-AP cone {m}: {ap_power[m]:.6g} > {upsilon[m] ** 2:.6g}")

    cap = 1.0 / problem.antennas
    for m in np.flatnonzero(upsilon**2 > cap * (1.0 + tol)):
        violations.append(f"power cap {m}: {upsilon[m] ** 2:.6g} > 1/N")

    if problem.kappa > 0:
        total = float(np.sum(upsilon**2))
        if problem.kappa * total > problem.sen_power * (1.0 + tol):
            violations.append(f"MASR: kappa * {total:.6g} > {problem.sen_power:.6g}")

    gain = np.sum(theta * problem.gamma, axis=0)
    floor = problem.t * ((problem.beta / problem.antennas).T @ upsilon**2 + problem.psi)
    for k in np.flatnonzero(gain**2 < floor * (1.0 - tol)):
        violations.append(f"user {k}: SINR target {problem.t:.6g} not met")
    return violations


def verify_sen_point(problem: SenFeasibilityProblem, eta: np.ndarray, tol: float) -> List[str]:
    """Evaluate every constraint of the sensing program; returns the violated ones"""
    violations = []
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0) or np.any(eta > 1.0 + tol):
        violations.append("sensing coefficient outside [0, 1]")
    total = float(math.fsum(eta))
    if total < problem.required_power * (1.0 - tol):
        violations.append(f"MASR: {total:.6g} < {problem.required_power:.6g}")
    load = problem.beta.T @ eta if problem.nS else np.zeros_like(problem.budget)
    for k in range(len(problem.budget)):
        limit = problem.budget[k]
        if np.isinf(limit):
            continue
        if load[k] > limit + tol * max(abs(limit), load[k]):
            violations.append(f"user {k}: sensing interference {load[k]:.6g} exceeds {limit:.6g}")
    return violations


# ---------------------------------------------------------------------------
# Bounds and shared helpers
# ---------------------------------------------------------------------------


def max_min_upper_bound(problem: ComFeasibilityProblem) -> float:
    """
    Provable upper bound on the reachable min-SINR

    Per user, the smaller of the interference-free bound (all caps tight) and the
    self-interference bound from Cauchy-Schwarz; minimized over users.
    """
    N = problem.antennas
    gamma, beta = problem.gamma, problem.beta
    if problem.nC == 0:
        return 0.0
    if problem.literal_constraint_21d:
        noise_bound = np.sum(gamma, axis=0) ** 2 / (N * problem.psi)
        self_bound = N * np.sum(gamma**2 / beta, axis=0)
    else:
        noise_bound = np.sum(np.sqrt(gamma), axis=0) ** 2 / (N * problem.psi)
        self_bound = N * np.sum(gamma / beta, axis=0)
    return float(np.min(np.minimum(noise_bound, self_bound)))


def repair_com_point(problem: ComFeasibilityProblem, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Map any phi onto the cap and MASR constraints; returns (theta, upsilon)"""
    phi = np.clip(np.asarray(phi, dtype=float), 0.0, None)
    if not problem.literal_constraint_21d:
        phi = np.where(problem.gamma > 0, phi, 0.0)
    upsilon = np.linalg.norm(phi, axis=1)

    over = upsilon > problem.power_cap
    if np.any(over):
        scale = np.where(over, problem.power_cap / np.where(over, upsilon, 1.0), 1.0)
        phi = phi * scale[:, None]
        upsilon = np.minimum(upsilon, problem.power_cap)

    radius = problem.masr_radius
    if radius is not None:
        norm = float(np.linalg.norm(upsilon))
        if norm > radius:
            scale = radius / norm if norm > 0 else 0.0
            phi = phi * scale
            upsilon = upsilon * scale
    return problem.theta_from_phi(phi), upsilon


def project_soc(t: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Project rows (t_i, v_i) onto {(t, v): ||v|| <= t}"""
    norm = np.linalg.norm(v, axis=-1)
    inside = norm <= t
    polar = norm <= -t
    alpha = 0.5 * (norm + t)
    safe = np.where(norm > 0, norm, 1.0)
    t_out = np.where(inside, t, np.where(polar, 0.0, alpha))
    v_out = np.where(
        inside[..., None],
        v,
        np.where(polar[..., None], 0.0, (alpha / safe)[..., None] * v),
    )
    return t_out, v_out


# ---------------------------------------------------------------------------
# ADMM backend
# ---------------------------------------------------------------------------


@dataclass
class ConeProgram:
    """Stacked constraint matrix: rows [0, n) are a box, then second-order cone blocks"""

    A: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    # (first row, number of cones, cone dimension)
    cones: List[Tuple[int, int, int]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.A.shape[1]


def assemble_cone_program(problem: ComFeasibilityProblem) -> ConeProgram:
    """
    Build A for x = [phi (row-major nC x K), upsilon (nC), s]

    s is a homogenizing scalar fixed to 1 by the box.
    """
    nC, K = problem.nC, problem.K
    n_phi = nC * K
    n = n_phi + nC + 1
    s_col = n - 1

    def phi_col(m: int, k: int) -> int:
        return m * K + k

    blocks = [np.eye(n)]
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    upper[n_phi:n_phi + nC] = problem.power_cap
    lower[s_col] = upper[s_col] = 1.0
    cones = []
    row = n

    # One cone per user: row-normalized gain >= ||(sqrt(t) interference, sqrt(t psi_k) s)||
    dim = nC + 2
    user_block = np.zeros((K * dim, n))
    root_t = math.sqrt(problem.t)
    for k in range(K):
        coefficients = np.concatenate(
            [problem.signal[:, k], root_t * problem.interference[:, k], [root_t * math.sqrt(problem.psi[k])]]
        )
        sigma = 1.0 / np.max(np.abs(coefficients))
        base = k * dim
        for m in range(nC):
            user_block[base, phi_col(m, k)] = sigma * problem.signal[m, k]
            user_block[base + 1 + m, n_phi + m] = sigma * root_t * problem.interference[m, k]
        user_block[base + nC + 1, s_col] = sigma * root_t * math.sqrt(problem.psi[k])
    blocks.append(user_block)
    cones.append((row, K, dim))
    row += K * dim

    # Per-AP cones ||phi_m|| <= upsilon_m
    dim = K + 1
    ap_block = np.zeros((nC * dim, n))
    for m in range(nC):
        base = m * dim
        ap_block[base, n_phi + m] = 1.0
        for k in range(K):
            ap_block[base + 1 + k, phi_col(m, k)] = 1.0
    blocks.append(ap_block)
    cones.append((row, nC, dim))
    row += nC * dim

    # MASR ball ||upsilon|| <= radius * s
    radius = problem.masr_radius
    if radius is not None:
        masr_block = np.zeros((nC + 1, n))
        masr_block[0, s_col] = radius
        masr_block[1:, n_phi:n_phi + nC] = np.eye(nC)
        blocks.append(masr_block)
        cones.append((row, 1, nC + 1))
        row += nC + 1

    return ConeProgram(A=np.vstack(blocks), lower=lower, upper=upper, cones=cones)


class AdmmSolver:
    """
    Over-relaxed scaled ADMM for "find x with Ax in C"

    C is the product of the box and the second-order cones of a ConeProgram.
    With a zero objective the iteration does not depend on the penalty parameter.
    Every ``check_every`` iterations the current x is repaired and verified;
    a persistent primal residual over ``stall_window`` iterations means infeasible.
    """

    def __init__(
        self,
        tolerance: float = 1e-8,
        max_iterations: int = 100_000,
        check_tolerance: float = 1e-6,
        relaxation: float = 1.6,
        check_every: int = 10,
        stall_window: int = 200,
    ):
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.check_tolerance = check_tolerance
        self.relaxation = relaxation
        self.check_every = check_every
        self.stall_window = stall_window

    def project(self, program: ConeProgram, v: np.ndarray) -> np.ndarray:
        out = np.empty_like(v)
        n = program.n
        out[:n] = np.clip(v[:n], program.lower, program.upper)
        for start, count, dim in program.cones:
            block = v[start:start + count * dim].reshape(count, dim)
            t_part, v_part = project_soc(block[:, 0], block[:, 1:])
            projected = np.column_stack([t_part, v_part])
            out[start:start + count * dim] = projected.ravel()
        return out

    def _accept(self, problem: ComFeasibilityProblem, x: np.ndarray):
        phi = x[: problem.nC * problem.K].reshape(problem.nC, problem.K)
        theta, upsilon = repair_com_point(problem, phi)
        violations = verify_com_point(problem, theta, upsilon, self.check_tolerance)
        return theta, upsilon, violations

    def solve(self, problem: ComFeasibilityProblem, x0: Optional[np.ndarray] = None) -> FeasibilityOutcome:
        program = assemble_cone_program(problem)
        A = program.A
        factor = linalg.cho_factor(A.T @ A)

        if x0 is None or x0.shape != (program.n,):
            x0 = np.concatenate([
                np.full(problem.nC * problem.K, problem.power_cap / math.sqrt(problem.K)),
                np.full(problem.nC, problem.power_cap),
                [1.0],
            ])
        z = self.project(program, A @ x0)
        u = np.zeros_like(z)
        x = x0
        alpha = self.relaxation
        best_history: List[float] = []
        residual = math.inf
        violations: List[str] = []

        for iteration in range(1, self.max_iterations + 1):
            x = linalg.cho_solve(factor, A.T @ (z - u))
            Ax = A @ x
            Ax_hat = alpha * Ax + (1.0 - alpha) * z
            z_next = self.project(program, Ax_hat + u)
            u = u + Ax_hat - z_next
            dual = float(np.linalg.norm(z_next - z))
            z = z_next
            residual = float(np.linalg.norm(Ax - z))

            converged = residual < self.tolerance and dual < self.tolerance
            if iteration % self.check_every == 0 or converged:
                theta, upsilon, violations = self._accept(problem, x)
                if not violations:
                    logger.debug(
                        "ADMM found a feasible point",
                        extra={"iterations": iteration, "t_star": problem.t, "status": FEASIBLE},
                    )
                    return FeasibilityOutcome(
                        feasible=True,
                        status=FEASIBLE,
                        point=problem.eta_com(theta),
                        iterations=iteration,
                        residual=residual,
                        warm_start=x,
                    )
                if converged:
                    return FeasibilityOutcome(
                        feasible=False,
                        status=STALLED,
                        iterations=iteration,
                        residual=residual,
                        violations=tuple(violations),
                    )

                best_history.append(min(residual, best_history[-1]) if best_history else residual)
                window = self.stall_window // self.check_every
                if iteration >= self.stall_window and len(best_history) > window:
                    if best_history[-1] > 0.999 * best_history[-1 - window]:
                        logger.debug(
                            "ADMM residual stagnated",
                            extra={"iterations": iteration, "t_star": problem.t, "status": INFEASIBLE},
                        )
                        return FeasibilityOutcome(
                            feasible=False,
                            status=INFEASIBLE,
                            iterations=iteration,
                            residual=residual,
                            violations=tuple(violations),
                        )

        logger.debug(
            "ADMM iteration limit reached",
            extra={"iterations": self.max_iterations, "t_star": problem.t, "status": ITERATION_LIMIT},
        )
        return FeasibilityOutcome(
            feasible=False,
            status=ITERATION_LIMIT,
            iterations=self.max_iterations,
            residual=residual,
            violations=tuple(violations),
        )


# ---------------------------------------------------------------------------
# cvxpy backend (optional cross-check)
# ---------------------------------------------------------------------------


def _import_cvxpy():
    try:
        import cvxpy as cp
    except ImportError as exc:
        raise SolverError("solver_backend = cvxpy requires the cvxpy package") from exc
    return cp


def _solve_com_cvxpy(problem: ComFeasibilityProblem, check_tolerance: float) -> FeasibilityOutcome:
    cp = _import_cvxpy()
    nC, K = problem.nC, problem.K
    phi = cp.Variable((nC, K), nonneg=True)
    upsilon = cp.Variable(nC, nonneg=True)
    root_t = math.sqrt(problem.t)

    constraints = [upsilon <= problem.power_cap]
    constraints += [cp.SOC(upsilon[m], phi[m, :]) for m in range(nC)]
    for k in range(K):
        sigma = 1.0 / max(
            float(np.max(problem.signal[:, k])),
            root_t * float(np.max(problem.interference[:, k])),
            root_t * math.sqrt(problem.psi[k]),
        )
        gain = sigma * (problem.signal[:, k] @ phi[:, k])
        spread = cp.hstack([
            cp.multiply(sigma * root_t * problem.interference[:, k], upsilon),
            np.array([sigma * root_t * math.sqrt(problem.psi[k])]),
        ])
        constraints.append(cp.SOC(gain, spread))
    if problem.masr_radius is not None:
        constraints.append(cp.norm(upsilon, 2) <= problem.masr_radius)

    cvx_problem = cp.Problem(cp.Minimize(0), constraints)
    try:
        cvx_problem.solve()
    except cp.error.SolverError as exc:
        raise SolverError(f"cvxpy failed: {exc}") from exc

    if cvx_problem.status not in ("optimal", "optimal_inaccurate") or phi.value is None:
        return FeasibilityOutcome(feasible=False, status=INFEASIBLE)
    theta, ups = repair_com_point(problem, phi.value)
    violations = verify_com_point(problem, theta, ups, check_tolerance)
    if violations:
        return FeasibilityOutcome(feasible=False, status=STALLED, violations=tuple(violations))
    return FeasibilityOutcome(feasible=True, status=FEASIBLE, point=problem.eta_com(theta))


def _solve_sen_cvxpy(problem: SenFeasibilityProblem, check_tolerance: float) -> FeasibilityOutcome:
    cp = _import_cvxpy()
    eta = cp.Variable(problem.nS)
    rows = _sen_rows(problem)
    if rows is None:
        return FeasibilityOutcome(feasible=False, status=INFEASIBLE)
    A_ub, b_ub, cost = rows
    constraints = [eta >= 0, eta <= 1]
    if A_ub.size:
        constraints.append(A_ub @ eta <= b_ub)
    cvx_problem = cp.Problem(cp.Minimize(cost @ eta), constraints)
    try:
        cvx_problem.solve()
    except cp.error.SolverError as exc:
        raise SolverError(f"cvxpy failed: {exc}") from exc
    if cvx_problem.status not in ("optimal", "optimal_inaccurate") or eta.value is None:
        return FeasibilityOutcome(feasible=False, status=INFEASIBLE)
    return _finish_sen(problem, eta.value, check_tolerance)


# ---------------------------------------------------------------------------
# Linear sensing program
# ---------------------------------------------------------------------------


def _sen_rows(problem: SenFeasibilityProblem):
    """Row-normalized inequality system A_ub eta <= b_ub; None when trivially infeasible"""
    rows, bounds = [], []
    for k, limit in enumerate(problem.budget):
        if np.isinf(limit):
            continue
        coefficients = problem.beta[:, k]
        scale = float(np.max(coefficients)) if problem.nS else 0.0
        if scale <= 0:
            if limit < 0:
                return None
            continue
        rows.append(coefficients / scale)
        bounds.append(limit / scale)
    if problem.required_power > 0:
        rows.append(-np.ones(problem.nS))
        bounds.append(-problem.required_power)

    cost = np.sum(problem.beta, axis=1)
    if cost.size and np.max(cost) > 0:
        cost = cost / np.max(cost)
    A_ub = np.array(rows).reshape(len(rows), problem.nS)
    return A_ub, np.array(bounds), cost


def _finish_sen(problem: SenFeasibilityProblem, values: np.ndarray, check_tolerance: float) -> FeasibilityOutcome:
    values = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    violations = verify_sen_point(problem, values, check_tolerance)
    if violations:
        return FeasibilityOutcome(feasible=False, status=STALLED, violations=tuple(violations))
    return FeasibilityOutcome(feasible=True, status=FEASIBLE, point=problem.eta_sen(values))


def _solve_sen_linprog(problem: SenFeasibilityProblem, check_tolerance: float) -> FeasibilityOutcome:
    if problem.nS == 0:
        ok = problem.required_power <= 0 and not np.any(problem.budget < 0)
        status = FEASIBLE if ok else INFEASIBLE
        return FeasibilityOutcome(feasible=ok, status=status, point=problem.eta_sen(np.zeros(0)) if ok else None)

    rows = _sen_rows(problem)
    if rows is None:
        return FeasibilityOutcome(feasible=False, status=INFEASIBLE)
    A_ub, b_ub, cost = rows
    result = linprog(
        cost,
        A_ub=A_ub if A_ub.size else None,
        b_ub=b_ub if A_ub.size else None,
        bounds=[(0.0, 1.0)] * problem.nS,
        method="highs",
    )
    if result.status == 2:
        return FeasibilityOutcome(feasible=False, status=INFEASIBLE, iterations=int(result.nit))
    if result.status != 0:
        status = ITERATION_LIMIT if result.status == 1 else STALLED
        return FeasibilityOutcome(feasible=False, status=status, iterations=int(result.nit))
    outcome = _finish_sen(problem, result.x, check_tolerance)
    return FeasibilityOutcome(
        feasible=outcome.feasible,
        status=outcome.status,
        point=outcome.point,
        iterations=int(result.nit),
        violations=outcome.violations,
    )


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


@singledispatch
def solve_feasibility(problem, config: SystemConfig, warm_start: Optional[np.ndarray] = None) -> FeasibilityOutcome:
    raise TypeError(f"unsupported feasibility problem: {type(problem).__name__}")


@solve_feasibility.register
def _(problem: ComFeasibilityProblem, config: SystemConfig, warm_start: Optional[np.ndarray] = None) -> FeasibilityOutcome:
    if config.dump_dir:
        dump_problem(problem, Path(config.dump_dir) / f"com-{uuid.uuid4().hex[:12]}.txt")

    if problem.t <= 0:
        theta = np.zeros((problem.nC, problem.K))
        return FeasibilityOutcome(feasible=True, status=FEASIBLE, point=problem.eta_com(theta))
    if np.any(np.max(problem.signal, axis=0, initial=0.0) <= 0) or problem.masr_radius == 0.0:
        return FeasibilityOutcome(feasible=False, status=INFEASIBLE)

    if config.solver_backend == "cvxpy":
        return _solve_com_cvxpy(problem, config.check_tolerance)
    solver = AdmmSolver(
        tolerance=config.solver_tolerance,
        max_iterations=config.solver_max_iterations,
        check_tolerance=config.check_tolerance,
    )
    return solver.solve(problem, warm_start)


@solve_feasibility.register
def _(problem: SenFeasibilityProblem, config: SystemConfig, warm_start: Optional[np.ndarray] = None) -> FeasibilityOutcome:
    if config.dump_dir:
        dump_problem(problem, Path(config.dump_dir) / f"sen-{uuid.uuid4().hex[:12]}.txt")
    if config.solver_backend == "cvxpy" and problem.nS:
        return _solve_sen_cvxpy(problem, config.check_tolerance)
    return _solve_sen_linprog(problem, config.check_tolerance)


# ---------------------------------------------------------------------------
# Plain-text dump
# ---------------------------------------------------------------------------


def _vector(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def dump_problem(problem, path) -> Path:
    """
    Write a feasibility problem as plain text for external cross-checks

    Format: ``key = value`` header lines, then for the cone program the box
    bounds, the cone list ``soc <first row> <count> <dimension>`` and the
    nonzeros of A as ``row col value`` triplets; the linear program lists
    ``A_ub``/``b_ub`` rows and the cost vector. Infinite bounds are ``inf``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if isinstance(problem, ComFeasibilityProblem):
        lines += [
            "kind = com",
            f"t = {problem.t!r}",
            f"antennas = {problem.antennas}",
            f"kappa = {problem.kappa!r}",
            f"sen_power = {problem.sen_power!r}",
            f"literal_constraint_21d = {problem.literal_constraint_21d}",
            f"com_aps = {' '.join(str(int(m)) for m in problem.com_indices)}",
            "variables = phi(row-major nC x K) upsilon(nC) s",
        ]
        if problem.t > 0 and problem.nC:
            program = assemble_cone_program(problem)
            rows, cols = np.nonzero(program.A)
            lines += [
                f"rows = {program.A.shape[0]}",
                f"cols = {program.n}",
                f"box_lower = {_vector(program.lower)}",
                f"box_upper = {_vector(program.upper)}",
            ]
            lines += [f"soc {start} {count} {dim}" for start, count, dim in program.cones]
            lines.append("A")
            lines += [f"{r} {c} {program.A[r, c]!r}" for r, c in zip(rows, cols)]
    elif isinstance(problem, SenFeasibilityProblem):
        lines += [
            "kind = sen",
            f"level = {problem.level!r}",
            f"required_power = {problem.required_power!r}",
            f"sen_aps = {' '.join(str(int(m)) for m in problem.sen_indices)}",
            "bounds = 0 1",
        ]
        rows = _sen_rows(problem) if problem.nS else None
        if rows is not None:
            A_ub, b_ub, cost = rows
            lines.append(f"cost = {_vector(cost)}")
            lines.append("A_ub | b_ub")
            lines += [f"{_vector(row)} | {bound!r}" for row, bound in zip(A_ub, b_ub)]
    else:
        raise TypeError(f"unsupported feasibility problem: {type(problem).__name__}")

    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
