"""Barrier-Newton solver for the fixed-schedule power-allocation problem.

With the relay selection frozen, the working objective log V' and the
constraints (outage cap, energy budget, power boxes) are all convex in the
log-domain power variables, so the continuous subproblem is solved by a
standard logarithmic-barrier method with damped Newton inner iterations.
Everything is deterministic: no randomness, fixed iteration rules, analytic
gradients and Hessians from the posynomial forms.

Variable layout for a schedule with n selected relays:
x = (ptilde_1..ptilde_M, ptilde'_j for selected j in index order), dim M+n.
Unselected relays are eliminated from the vector entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import P_MIN, LinkCoefficients, ScenarioConfig
from .outage import (
    PowerAllocation,
    RelaySchedule,
    nonc_outage_posynomials,
    outage_posynomial,
    powers_from_log,
)
from .posynomial import Posynomial

__all__ = [
    "PrimalProblem",
    "PrimalSolution",
    "assemble_primal",
    "solve_primal",
    "gradients",
    "scheme_constants",
]

# Barrier schedule: weight 1, divide by 10 per stage, stop when the duality
# gap bound (#constraints * weight) drops below GAP_TOL.
GAP_TOL = 1e-7
NEWTON_TOL = 1e-12          # half squared Newton decrement
ARMIJO_SLOPE = 0.3
ARMIJO_SHRINK = 0.5
MAX_NEWTON = 200


def scheme_constants(s: ScenarioConfig, scheme: str) -> tuple[float, float, float, float]:
    """Per-scheme energy structure (gamma, delta0, m_slots, obj_coef).

    Circuit energy of n selected relays is gamma*n + delta0; the second hop
    occupies m_slots slots per relay (1 for MDNC, M for NoNC); obj_coef
    scales the outage posynomial(s) inside V' (M*alpha0 for the single MDNC
    outage, alpha0 for each per-user NoNC outage).
    """
    if scheme == "mdnc":
        m = 1.0
        obj_coef = s.M * s.alpha0
    elif scheme == "nonc":
        m = float(s.M)
        obj_coef = s.alpha0
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    gamma = s.T * (s.M * s.P0_R + m * s.P0_R + s.beta * s.P_sleep_R + m * s.P0_BS)
    delta0 = s.P_sleep_BS * s.M * s.T - s.beta * s.T * s.P_sleep_R
    return gamma, delta0, m, obj_coef


@dataclass
class PrimalProblem:
    """Assembled fixed-schedule problem: min log V'(x) subject to outage,
    budget and box constraints, all posynomial-backed."""

    s: ScenarioConfig
    coeffs: LinkCoefficients
    schedule: RelaySchedule
    q: float
    scheme: str
    targets: np.ndarray                 # one outage cap (MDNC) or M per-user caps (NoNC)
    lo: np.ndarray                      # box lower bounds on x
    hi: np.ndarray                      # box upper bounds on x
    vprime: Posynomial                  # objective inside: tilde V = log vprime
    outage_pos: list[Posynomial]        # constraint posynomial(s), same order as targets
    budget_pos: Posynomial              # grid energy draw, exponential part + constants
    budget_cap: float                   # budget_pos(x) <= budget_cap
    feasible: bool
    infeasible_reason: str | None = None
    max_slack_point: np.ndarray | None = None   # argmin of outage over the box (cut anchor)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def split(self, x):
        return np.asarray(x[: self.s.M]), np.asarray(x[self.s.M:])

    def powers(self, x) -> PowerAllocation:
        ptilde, ptr = self.split(x)
        full = np.zeros(self.s.N)
        full[list(self.schedule.theta)] = ptr
        return powers_from_log(self.coeffs, self.schedule, ptilde, full)

    def tilde_v_at(self, x) -> float:
        return self.vprime.logvalue(x)

    def outage_at(self, x) -> np.ndarray:
        return np.array([pos.value(x) for pos in self.outage_pos])


@dataclass
class PrimalSolution:
    """Solver output at one schedule: optimum, powers, and diagnostics."""

    x: np.ndarray
    ptilde: np.ndarray
    ptilde_relay: np.ndarray            # selected relays only, schedule order
    powers: PowerAllocation
    tilde_v: float
    vprime: float
    outage_approx: np.ndarray
    converged: bool
    newton_iterations: int
    barrier_stages: int
    kkt_residual: float
    active_constraints: dict = field(default_factory=dict)


def _build_vprime(s: ScenarioConfig, coeffs: LinkCoefficients, schedule: RelaySchedule,
                  q: float, scheme: str, outage_pos: list[Posynomial]) -> Posynomial:
    gamma, delta0, m, obj_coef = scheme_constants(s, scheme)
    n = schedule.count
    dim = s.M + n
    selected = schedule.theta

    vp = Posynomial.constant(q * (gamma * n + delta0)
                             + q * m * s.T * s.delta_P * float(np.sum(coeffs.c_g))
                             - q * m * s.T * s.delta_P * float(np.sum(coeffs.c_g[list(selected)])),
                             dim)
    for i in range(s.M):
        vp = vp + Posynomial.single_var(q * s.T, i, 1.0, dim)
    for k, j in enumerate(selected):
        vp = vp + Posynomial.single_var(q * m * s.delta_P * s.T * coeffs.c_g[j], s.M + k, 1.0, dim)
    for pos in outage_pos:
        vp = vp + obj_coef * pos
    return vp.merged()


def assemble_primal(s: ScenarioConfig, coeffs: LinkCoefficients, schedule: RelaySchedule,
                    q: float, target: float | None = None, scheme: str = "mdnc",
                    include_user_energy: bool = False) -> PrimalProblem:
    """Build the fixed-schedule problem and pre-check feasibility.

    The outage cap is monotone decreasing in every power, so the max-power
    corner minimizes it; if even that corner misses the target (with the
    budget honored), the problem is marked infeasible and the minimizing
    point is kept as the certificate anchor for an infeasibility cut.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    if target is None:
        target = s.pr_out_target
    n = schedule.count
    dim = s.M + n
    selected = schedule.theta

    if scheme == "mdnc":
        outage_pos = [outage_posynomial(coeffs, selected, s.M)]
        targets = np.array([target])
    else:
        outage_pos = nonc_outage_posynomials(coeffs, selected, s.M)
        targets = np.full(s.M, target)

    gamma, delta0, m, _ = scheme_constants(s, scheme)
    lo = np.concatenate([np.full(s.M, np.log(P_MIN)), np.zeros(n)])
    caps = np.array([np.log1p(s.P_R_max / coeffs.c_g[j]) for j in selected])
    hi = np.concatenate([np.full(s.M, np.log(s.P_S_max)), caps])

    # Grid energy draw: circuit + load-dependent transmit part. The
    # -c_j offsets of the substituted relay powers move into the cap.
    budget = Posynomial.constant(gamma * n + delta0, dim)
    for k, j in enumerate(selected):
        budget = budget + Posynomial.single_var(m * s.delta_P * s.T * coeffs.c_g[j], s.M + k, 1.0, dim)
    budget_cap = s.E0 + m * s.delta_P * s.T * float(np.sum(coeffs.c_g[list(selected)]))
    if include_user_energy:
        for i in range(s.M):
            budget = budget + Posynomial.single_var(s.T, i, 1.0, dim)
    budget = budget.merged()

    vprime = _build_vprime(s, coeffs, schedule, q, scheme, outage_pos)
    pp = PrimalProblem(s=s, coeffs=coeffs, schedule=schedule, q=q, scheme=scheme,
                       targets=targets, lo=lo, hi=hi, vprime=vprime,
                       outage_pos=outage_pos, budget_pos=budget, budget_cap=budget_cap,
                       feasible=True)

    if n < s.M and scheme == "mdnc":
        pp.feasible = False
        pp.infeasible_reason = f"schedule selects {n} < M = {s.M} relays; outage is certain"
        pp.max_slack_point = hi.copy()
        return pp

    if budget.value(hi) <= budget_cap:
        x_slack = hi.copy()
    else:
        # Budget binds before full power: push the outage down along the
        # steepest admissible direction instead of assuming the corner.
        x_slack = _max_slack_point(pp)
    pp.max_slack_point = x_slack
    if np.any(pp.outage_at(x_slack) > targets):
        pp.feasible = False
        worst = int(np.argmax(pp.outage_at(x_slack) / targets))
        pp.infeasible_reason = (
            f"outage {pp.outage_at(x_slack)[worst]:.3e} above target {targets[worst]:.3e} "
            f"at maximum admissible power for schedule {selected}"
        )
    return pp


def _max_slack_point(pp: PrimalProblem) -> np.ndarray:
    """Minimize the aggregate relative outage subject to budget and boxes.

    Used only when the budget excludes the max-power corner. The aggregate
    sum_i Pout_i/target_i is a posynomial, so this is one more convex solve;
    its minimizer is the constraint-slack certificate point.
    """
    agg = Posynomial.constant(0.0, pp.dim)
    for pos, t in zip(pp.outage_pos, pp.targets):
        agg = agg + (1.0 / t) * pos
    interior = 0.5 * (pp.lo + pp.hi)
    # start strictly inside the budget: shrink relay powers toward zero
    x = interior.copy()
    for _ in range(80):
        if pp.budget_pos.value(x) < pp.budget_cap:
            break
        x[pp.s.M:] = 0.5 * x[pp.s.M:]
    res = _barrier_minimize(
        objective=agg,
        constraints=[("pos", pp.budget_pos, pp.budget_cap)],
        lo=pp.lo, hi=pp.hi, x0=x, log_objective=True,
    )
    return res[0]


def _constraint_eval(kind, pos, cap, x):
    """Value of g(x) <= 0 and its gradient/Hessian pieces."""
    if kind == "pos":
        g = pos.value(x) - cap
        grad = pos.grad(x)
        hess = pos.hess(x)
    else:  # "logpos": log posynomial <= log cap
        g = pos.logvalue(x) - np.log(cap)
        grad = pos.loggrad(x)
        hess = pos.loghess(x)
    return g, grad, hess


def _barrier_minimize(objective: Posynomial, constraints, lo, hi, x0,
                      log_objective: bool = True):
    """Minimize log(objective(x)) (or objective itself) over box + constraints.

    Returns (x, newton_iterations, barrier_stages, kkt_residual).
    Implements the pinned schedule: barrier weight mu from 1 by factors of
    10 until (#inequalities)*mu < GAP_TOL, damped Newton inside.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    dim = len(x)
    m_ineq = 2 * dim + len(constraints)

    def f_val(x):
        return objective.logvalue(x) if log_objective else objective.value(x)

    def f_grad(x):
        return objective.loggrad(x) if log_objective else objective.grad(x)

    def f_hess(x):
        return objective.loghess(x) if log_objective else objective.hess(x)

    def strictly_feasible(x):
        if np.any(x <= lo) or np.any(x >= hi):
            return False
        for kind, pos, cap in constraints:
            g, _, _ = _constraint_eval(kind, pos, cap, x)
            if g >= 0:
                return False
        return True

    def phi_parts(x):
        """Barrier value, gradient, Hessian of -sum log(-g_i)."""
        val = 0.0
        grad = np.zeros(dim)
        hess = np.zeros((dim, dim))
        su = hi - x
        sl = x - lo
        val -= np.sum(np.log(su)) + np.sum(np.log(sl))
        grad += 1.0 / su - 1.0 / sl
        hess += np.diag(1.0 / su**2 + 1.0 / sl**2)
        for kind, pos, cap in constraints:
            g, gg, gh = _constraint_eval(kind, pos, cap, x)
            val -= np.log(-g)
            grad += gg / (-g)
            hess += gh / (-g) + np.outer(gg, gg) / g**2
        return val, grad, hess

    if not strictly_feasible(x):
        raise RuntimeError("barrier start point is not strictly feasible")

    mu = 1.0
    newton_total = 0
    stages = 0
    exhausted = False
    while True:
        stages += 1
        t = 1.0 / mu
        for inner in range(MAX_NEWTON):
            fg = f_grad(x)
            fh = f_hess(x)
            bv, bg, bh = phi_parts(x)
            grad = t * fg + bg
            hess = t * fh + bh
            try:
                step = np.linalg.solve(hess, -grad)
            except np.linalg.LinAlgError:
                step = np.linalg.solve(hess + 1e-10 * np.trace(hess) * np.eye(dim), -grad)
            decrement2 = float(-grad @ step)
            if decrement2 / 2.0 <= NEWTON_TOL:
                break
            # backtracking: stay strictly feasible, then Armijo
            base = t * f_val(x) + bv
            alpha = 1.0
            while alpha > 1e-14:
                xn = x + alpha * step
                if strictly_feasible(xn):
                    fn = t * f_val(xn) + phi_parts(xn)[0]
                    if fn <= base + ARMIJO_SLOPE * alpha * float(grad @ step):
                        break
                alpha *= ARMIJO_SHRINK
            else:
                break
            x = x + alpha * step
            newton_total += 1
        else:
            exhausted = True   # Newton budget spent before reaching tolerance
        if m_ineq * mu < GAP_TOL:
            break
        mu /= 10.0

    # KKT stationarity residual of the original problem at the final iterate
    _, bg, _ = phi_parts(x)
    kkt = float(np.linalg.norm(f_grad(x) + mu * bg))
    return x, newton_total, stages, kkt, exhausted


def solve_primal(pp: PrimalProblem) -> PrimalSolution:
    """Solve the assembled problem to duality gap below GAP_TOL.

    Deterministic given its inputs: fixed start (box midpoint, bisected
    toward the max-slack corner until strictly feasible), fixed barrier and
    line-search rules.
    """
    if not pp.feasible:
        raise ValueError(f"primal problem is infeasible: {pp.infeasible_reason}")

    constraints = [("logpos", pos, t) for pos, t in zip(pp.outage_pos, pp.targets)]
    constraints.append(("pos", pp.budget_pos, pp.budget_cap))

    span = pp.hi - pp.lo
    x0 = 0.5 * (pp.lo + pp.hi)
    anchor = np.clip(pp.max_slack_point, pp.lo + 1e-9 * span, pp.hi - 1e-9 * span)

    def strictly_ok(x):
        if np.any(pp.outage_at(x) >= pp.targets):
            return False
        return pp.budget_pos.value(x) < pp.budget_cap

    for _ in range(200):
        if strictly_ok(x0):
            break
        x0 = 0.5 * (x0 + anchor)
    else:
        raise RuntimeError("could not find a strictly feasible start despite feasibility pre-check")

    x, newton_total, stages, kkt, exhausted = _barrier_minimize(
        objective=pp.vprime, constraints=constraints, lo=pp.lo, hi=pp.hi, x0=x0,
        log_objective=True,
    )

    ptilde, ptr = pp.split(x)
    powers = pp.powers(x)
    out = pp.outage_at(x)
    tv = pp.vprime.logvalue(x)

    tol = 1e-6
    active = {
        "outage": [bool(abs(np.log(o) - np.log(t)) <= tol) for o, t in zip(out, pp.targets)],
        "budget": bool(abs(pp.budget_pos.value(x) - pp.budget_cap) <= tol * (1 + pp.budget_cap)),
        "box_hi": (np.abs(x - pp.hi) <= tol * (1 + np.abs(pp.hi))).tolist(),
        "box_lo": (np.abs(x - pp.lo) <= tol * (1 + np.abs(pp.lo))).tolist(),
    }
    return PrimalSolution(
        x=x, ptilde=ptilde, ptilde_relay=ptr, powers=powers, tilde_v=tv,
        vprime=float(np.exp(tv)), outage_approx=out, converged=not exhausted,
        newton_iterations=newton_total, barrier_stages=stages,
        kkt_residual=kkt, active_constraints=active,
    )


def gradients(pp: PrimalProblem, x) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of tilde V and of g = Pr_out - target at x.

    Returns (grad_tilde_v, grad_g) with grad_g one row per outage constraint
    (a single row for MDNC). Used for outer-approximation cuts and checked
    against central differences in the test suite.
    """
    x = np.asarray(x, dtype=float)
    gtv = pp.vprime.loggrad(x)
    gg = np.vstack([pos.grad(x) for pos in pp.outage_pos])
    return gtv, gg
