"""Joint relay scheduling and power allocation by outer approximation.

The mixed-integer problem (binary relay selection, continuous log-domain
powers) is solved by nesting three loops:

* outermost, the parametric update of q = bits/(J*slot) until the
  subtractive objective V(q) has its root (fractional programming);
* per q, a generalized outer-approximation loop alternating a convex primal
  (powers for a fixed schedule; barrier-Newton) with a mixed-integer linear
  master over accumulated first-order cuts (branch-and-bound over the
  in-repo simplex);
* relay-count bounds precomputed from the exact outage at maximum power and
  from the circuit-energy budget prune the master's search space.

Master cuts are built in V' space, where the circuit energy is exactly
linear in the selection vector u and the smooth part is jointly convex, so
every cut is a global underestimator. The outage entering the master is the
full-relay-set approximation, which does not depend on u at all (an
unselected relay has ptilde'_j = 0, i.e. second-hop failure probability 1),
making the constraint cuts valid for every schedule. Integer no-good rows
exclude already-visited schedules outright, which keeps the upper/lower
bound bookkeeping exact in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .convex_solver import (
    PrimalProblem,
    PrimalSolution,
    assemble_primal,
    scheme_constants,
    solve_primal,
)
from .energy import EnergyBreakdown, nonc_energy, total_energy
from .lp import solve_lp
from .model import P_MIN, LinkCoefficients, ScenarioConfig
from .outage import (
    PowerAllocation,
    RelaySchedule,
    nonc_outage,
    nonc_outage_posynomials,
    outage_exact,
    outage_posynomial,
)
from .posynomial import Posynomial

__all__ = [
    "CountBounds",
    "OACut",
    "GoaState",
    "Solution",
    "relay_count_bounds",
    "build_oa_cuts",
    "solve_master",
    "goa_solve",
    "dinkelbach_solve",
    "nonc_solve",
    "dinkelbach_fixed_schedule",
]

GOA_REL_TOL = 1e-6          # stop when UBD - LBD <= tol * (1 + |UBD|)
IMPROVE_EPS_REL = 1e-9      # strict-improvement margin on the master's w
DINKELBACH_TOL_REL = 1e-6   # |V(q)| <= tol * M * alpha0
DINKELBACH_MAX_ITER = 50
GOA_MAX_ITER = 120
ENUM_GUARD_N = 12           # exhaustive subset work only up to this many relays


# ---------------------------------------------------------------------------
# Relay-count bounds


@dataclass(frozen=True)
class CountBounds:
    """Admissible relay-count window [low, up] plus the subset realizing low."""

    low: int | None
    up: int
    best_subset: tuple[int, ...] | None
    heuristic: bool = False

    @property
    def feasible(self) -> bool:
        return self.low is not None and self.low <= self.up


def _max_power_allocation(s: ScenarioConfig, schedule: RelaySchedule) -> PowerAllocation:
    return PowerAllocation(p=np.full(s.M, s.P_S_max), p_relay=schedule.u * s.P_R_max)


def _max_power_merit(s, coeffs, subset, scheme: str, target: float) -> float:
    """Outage-vs-target merit of a subset at full power; <= 1 means feasible."""
    schedule = RelaySchedule.from_indices(subset, s.N)
    powers = _max_power_allocation(s, schedule)
    if scheme == "mdnc":
        return outage_exact(s, coeffs, schedule, powers).total / target
    per_user = nonc_outage(coeffs, schedule, powers)
    return float(np.max(per_user)) / target


def relay_count_bounds(s: ScenarioConfig, coeffs: LinkCoefficients, target: float,
                       scheme: str = "mdnc") -> CountBounds:
    """Bracket the number of relays any solution can use.

    low: the smallest k whose best k-subset meets the outage target with every
    transmitter at maximum power (exact outage formula). up: the largest k
    whose circuit energy alone fits the budget. For N beyond the enumeration
    guard the k-subset search degrades to a greedy pick of the k smallest
    relay->BS coefficients; that path is a labeled heuristic.
    """
    gamma, delta0, _, _ = scheme_constants(s, scheme)
    up = 0
    for k in range(1, s.N + 1):
        if gamma * k + delta0 <= s.E0:
            up = k
    k_min = s.M if scheme == "mdnc" else 1

    low = None
    best_subset = None
    heuristic = s.N > ENUM_GUARD_N
    for k in range(k_min, s.N + 1):
        if heuristic:
            order = tuple(int(j) for j in np.argsort(coeffs.c_g, kind="stable")[:k])
            candidates = [order]
        else:
            candidates = combinations(range(s.N), k)
        best = None
        for subset in candidates:
            merit = _max_power_merit(s, coeffs, subset, scheme, target)
            if best is None or merit < best[0]:
                best = (merit, tuple(subset))
        if best is not None and best[0] <= 1.0:
            low, best_subset = k, best[1]
            break
    return CountBounds(low=low, up=up, best_subset=best_subset, heuristic=heuristic)


# ---------------------------------------------------------------------------
# Cuts and the master model


@dataclass(frozen=True)
class OACut:
    """First-order information collected at one solved (or refuted) primal.

    x is the anchor in full coordinates (M user variables then N relay
    variables, zeros for unselected relays). tilde_v/grad_tilde_v describe
    the fixed-schedule objective (zero components on unselected relays);
    g/grad_g describe the schedule-independent outage constraints minus
    their targets. vprime_master/obj_grad carry the master-model objective
    value and gradient used for the linear cuts. Infeasibility certificates
    have feasible=False and no objective information.
    """

    iteration: int
    schedule: tuple[int, ...]
    x: np.ndarray
    g: np.ndarray
    grad_g: np.ndarray
    feasible: bool
    tilde_v: float | None = None
    grad_tilde_v: np.ndarray | None = None
    vprime_master: float | None = None
    obj_grad: np.ndarray | None = None


class MasterModel:
    """Shared posynomials and constants for one (scheme, q, target) master."""

    def __init__(self, s: ScenarioConfig, coeffs: LinkCoefficients, scheme: str,
                 q: float, targets: np.ndarray, include_user_energy: bool = False):
        self.s = s
        self.coeffs = coeffs
        self.scheme = scheme
        self.q = float(q)
        self.targets = np.asarray(targets, dtype=float)
        self.include_user_energy = include_user_energy
        gamma, delta0, m_slots, obj_coef = scheme_constants(s, scheme)
        self.gamma, self.delta0, self.m_slots, self.obj_coef = gamma, delta0, m_slots, obj_coef
        self.dim = s.M + s.N
        full = tuple(range(s.N))
        if scheme == "mdnc":
            self.outage_full = [outage_posynomial(coeffs, full, s.M)]
        else:
            self.outage_full = nonc_outage_posynomials(coeffs, full, s.M)

        smooth = Posynomial.constant(0.0, self.dim)
        for i in range(s.M):
            smooth = smooth + Posynomial.single_var(q * s.T, i, 1.0, self.dim)
        for j in range(s.N):
            smooth = smooth + Posynomial.single_var(
                q * m_slots * s.delta_P * s.T * coeffs.c_g[j], s.M + j, 1.0, self.dim)
        for pos in self.outage_full:
            smooth = smooth + obj_coef * pos
        self.obj_smooth = smooth.merged()   # V'(x,u) = obj_smooth(x) + q*(gamma*sum(u) + delta0)

        bexp = Posynomial.constant(0.0, self.dim)
        for j in range(s.N):
            bexp = bexp + Posynomial.single_var(m_slots * s.delta_P * s.T * coeffs.c_g[j],
                                                s.M + j, 1.0, self.dim)
        if include_user_energy:
            for i in range(s.M):
                bexp = bexp + Posynomial.single_var(s.T, i, 1.0, self.dim)
        self.budget_exp = bexp.merged()
        self.budget_offset = m_slots * s.delta_P * s.T * float(np.sum(coeffs.c_g))
        self.caps = np.log1p(s.P_R_max / coeffs.c_g)
        self.v_scale = s.M * s.alpha0    # master works in v / v_scale units

    def anchor_full(self, schedule: RelaySchedule, sol_x: np.ndarray) -> np.ndarray:
        x = np.zeros(self.dim)
        x[: self.s.M] = sol_x[: self.s.M]
        for k, j in enumerate(schedule.theta):
            x[self.s.M + j] = sol_x[self.s.M + k]
        return x


def build_oa_cuts(pp: PrimalProblem, sol: PrimalSolution | None, master: MasterModel,
                  iteration: int) -> OACut:
    """Linearize objective and constraints at a solved primal point, or build
    the infeasibility certificate cut at the maximum-slack point."""
    schedule = pp.schedule
    if sol is not None:
        x = master.anchor_full(schedule, sol.x)
        gtv_sel = pp.vprime.loggrad(sol.x)
        gtv = np.zeros(master.dim)
        gtv[: pp.s.M] = gtv_sel[: pp.s.M]
        for k, j in enumerate(schedule.theta):
            gtv[pp.s.M + j] = gtv_sel[pp.s.M + k]
        g = np.array([pos.value(x) for pos in master.outage_full]) - master.targets
        grad_g = np.vstack([pos.grad(x) for pos in master.outage_full])
        vpm = master.obj_smooth.value(x) + master.q * (master.gamma * schedule.count + master.delta0)
        return OACut(iteration=iteration, schedule=schedule.theta, x=x, g=g, grad_g=grad_g,
                     feasible=True, tilde_v=sol.tilde_v, grad_tilde_v=gtv,
                     vprime_master=vpm, obj_grad=master.obj_smooth.grad(x))
    x = master.anchor_full(schedule, pp.max_slack_point)
    g = np.array([pos.value(x) for pos in master.outage_full]) - master.targets
    grad_g = np.vstack([pos.grad(x) for pos in master.outage_full])
    return OACut(iteration=iteration, schedule=schedule.theta, x=x, g=g, grad_g=grad_g,
                 feasible=False)


@dataclass
class GoaState:
    """Outer-approximation bookkeeping for one (q, target) inner solve."""

    s: ScenarioConfig
    coeffs: LinkCoefficients
    scheme: str
    q: float
    targets: np.ndarray
    master: MasterModel
    bounds: CountBounds
    include_user_energy: bool = False
    cuts: list[OACut] = field(default_factory=list)
    visited: list[tuple[int, ...]] = field(default_factory=list)
    ubd: float = math.inf
    lbd: float = -math.inf
    ubd_history: list[float] = field(default_factory=list)
    lbd_history: list[float] = field(default_factory=list)
    incumbent: PrimalSolution | None = None
    incumbent_schedule: RelaySchedule | None = None
    iteration: int = 0
    newton_total: int = 0
    converged: bool = False
    termination: str = ""


def _master_lp_rows(state: GoaState):
    """Assemble the master MILP's linear rows over z = [ptilde, ptilde', u, vhat]."""
    m = state.master
    s = state.s
    M, N = s.M, s.N
    nv = M + 2 * N + 1
    iv = M + 2 * N                      # vhat column
    u0 = M + N
    rows, rhs = [], []

    def new_row():
        return np.zeros(nv)

    # always-valid floor: v >= q * circuit(u)
    r = new_row()
    r[u0:u0 + N] = m.q * m.gamma
    r[iv] = -m.v_scale
    rows.append(r)
    rhs.append(-m.q * m.delta0)

    # always-valid budget floor: circuit(u) alone must fit
    r = new_row()
    r[u0:u0 + N] = m.gamma
    rows.append(r)
    rhs.append(s.E0 - m.delta0)

    for cut in state.cuts:
        if cut.feasible:
            r = new_row()
            r[:M + N] = cut.obj_grad
            r[u0:u0 + N] += m.q * m.gamma
            r[iv] = -m.v_scale
            rows.append(r)
            rhs.append(float(cut.obj_grad @ cut.x) - (m.obj_smooth.value(cut.x) + m.q * m.delta0))
        for gi, ggrad in zip(cut.g, cut.grad_g):
            r = new_row()
            r[:M + N] = ggrad
            rows.append(r)
            rhs.append(float(ggrad @ cut.x) - float(gi))
        bgrad = m.budget_exp.grad(cut.x)
        r = new_row()
        r[:M + N] = bgrad
        r[u0:u0 + N] += m.gamma
        rows.append(r)
        rhs.append(s.E0 - m.delta0 + m.budget_offset
                   - m.budget_exp.value(cut.x) + float(bgrad @ cut.x))

    for visited in state.visited:
        r = new_row()
        inside = set(visited)
        for j in range(N):
            r[u0 + j] = 1.0 if j in inside else -1.0
        rows.append(r)
        rhs.append(len(visited) - 1.0)

    r = new_row()
    r[u0:u0 + N] = 1.0
    rows.append(r)
    rhs.append(float(state.bounds.up))
    r = new_row()
    r[u0:u0 + N] = -1.0
    rows.append(r)
    rhs.append(-float(state.bounds.low))

    for j in range(N):
        r = new_row()
        r[M + j] = 1.0
        r[u0 + j] = -m.caps[j]
        rows.append(r)
        rhs.append(0.0)

    lb = np.concatenate([np.full(M, np.log(P_MIN)), np.zeros(N), np.zeros(N), [0.0]])
    if math.isfinite(state.ubd):
        vcap = math.exp(state.ubd - IMPROVE_EPS_REL * abs(state.ubd)) / m.v_scale
    else:
        vcap = 1e9
    ub = np.concatenate([np.full(M, np.log(s.P_S_max)), m.caps, np.ones(N), [vcap]])
    c = np.zeros(nv)
    c[iv] = 1.0
    return c, np.array(rows), np.array(rhs), lb, ub


def solve_master(state: GoaState):
    """Solve the master MILP by branch-and-bound on the relay variables.

    Returns (schedule, w) with w = log of the master optimum (the new lower
    bound), or None when no schedule can still beat the incumbent, which is
    the optimality certificate that stops the outer-approximation loop.
    """
    if not state.cuts:
        raise ValueError("master needs at least one cut")
    c, A, b, lb, ub = _master_lp_rows(state)
    s = state.s
    u0 = s.M + s.N
    n_u = s.N

    best: dict = {"obj": math.inf, "x": None}

    def recurse(lo_u, hi_u):
        lbn = lb.copy()
        ubn = ub.copy()
        lbn[u0:u0 + n_u] = lo_u
        ubn[u0:u0 + n_u] = hi_u
        res = solve_lp(c, A, b, lbn, ubn)
        if res.status != "optimal":
            return
        if res.objective >= best["obj"] - 1e-12 * (1.0 + abs(best["obj"])):
            return
        u = res.x[u0:u0 + n_u]
        frac = np.abs(u - np.round(u))
        undecided = np.where((frac > 1e-6) & (lo_u < hi_u))[0]
        if len(undecided) == 0:
            u_int = np.round(u).astype(int)
            u_int = np.clip(u_int, lo_u.astype(int), hi_u.astype(int))
            lbn[u0:u0 + n_u] = u_int
            ubn[u0:u0 + n_u] = u_int
            leaf = solve_lp(c, A, b, lbn, ubn)
            if leaf.status == "optimal" and leaf.objective < best["obj"]:
                best["obj"] = leaf.objective
                best["x"] = leaf.x
            return
        # branch on the fractional u_j closest to 1/2, lowest index on ties
        scores = np.abs(u[undecided] - 0.5)
        j = int(undecided[np.argmin(scores)])
        children = []
        for value in (0, 1):
            lo_c, hi_c = lo_u.copy(), hi_u.copy()
            lo_c[j] = hi_c[j] = value
            child = solve_lp(c, A, b,
                             np.concatenate([lb[:u0], lo_c, lb[u0 + n_u:]]),
                             np.concatenate([ub[:u0], hi_c, ub[u0 + n_u:]]))
            if child.status == "optimal":
                children.append((child.objective, value, lo_c, hi_c))
        children.sort(key=lambda t: (t[0], t[1]))
        for _, _, lo_c, hi_c in children:
            recurse(lo_c, hi_c)

    recurse(np.zeros(n_u), np.ones(n_u))
    if best["x"] is None:
        return None
    u = np.round(best["x"][u0:u0 + n_u]).astype(int)
    schedule = RelaySchedule(u)
    w = math.log(best["obj"] * state.master.v_scale)
    return schedule, w


def goa_solve(s: ScenarioConfig, coeffs: LinkCoefficients, q: float, target: float,
              scheme: str = "mdnc", bounds: CountBounds | None = None,
              warm_schedule: RelaySchedule | None = None,
              include_user_energy: bool = False) -> GoaState:
    """Outer-approximation loop for one fixed q: returns its final state.

    Alternates the fixed-schedule primal (updating the incumbent and the
    nonincreasing upper bound) with the cut master (updating the
    nondecreasing lower bound) until the bounds meet or the master proves
    that nothing can improve on the incumbent.
    """
    if bounds is None:
        bounds = relay_count_bounds(s, coeffs, target, scheme)
    if not bounds.feasible:
        raise ValueError(
            f"no admissible relay count: low={bounds.low}, up={bounds.up} for target {target}")
    targets = np.array([target]) if scheme == "mdnc" else np.full(s.M, target)
    master = MasterModel(s, coeffs, scheme, q, targets, include_user_energy)
    state = GoaState(s=s, coeffs=coeffs, scheme=scheme, q=q, targets=targets,
                     master=master, bounds=bounds, include_user_energy=include_user_energy)

    schedule = warm_schedule or RelaySchedule.from_indices(bounds.best_subset, s.N)
    for t in range(1, GOA_MAX_ITER + 1):
        state.iteration = t
        pp = assemble_primal(s, coeffs, schedule, q, target=target, scheme=scheme,
                             include_user_energy=include_user_energy)
        if pp.feasible:
            sol = solve_primal(pp)
            state.newton_total += sol.newton_iterations
            state.cuts.append(build_oa_cuts(pp, sol, master, t))
            if sol.tilde_v < state.ubd:
                state.ubd = sol.tilde_v
                state.incumbent = sol
                state.incumbent_schedule = schedule
        else:
            state.cuts.append(build_oa_cuts(pp, None, master, t))
        state.visited.append(schedule.theta)
        state.ubd_history.append(state.ubd)

        outcome = solve_master(state)
        if outcome is None:
            state.converged = state.incumbent is not None
            state.termination = "master infeasible (no remaining schedule can improve)"
            break
        schedule, w = outcome
        state.lbd = w
        state.lbd_history.append(w)
        if math.isfinite(state.ubd) and state.ubd - state.lbd <= GOA_REL_TOL * (1.0 + abs(state.ubd)):
            state.converged = True
            state.termination = "bound gap closed"
            break
        if schedule.theta in state.visited:
            # no-good rows make this unreachable; trip loudly if numerics disagree
            state.termination = "master revisited a schedule"
            break
    else:
        state.termination = "iteration limit"
    return state


# ---------------------------------------------------------------------------
# Outer parametric loop


@dataclass
class Solution:
    """Final operating point for one (scenario, target, scheme) run."""

    feasible: bool
    scheme: str
    target: float
    schedule: RelaySchedule | None = None
    powers: PowerAllocation | None = None
    ee: float | None = None
    pr_out_exact: object = None         # float (MDNC) or per-user array (NoNC)
    pr_out_approx: object = None
    energy: EnergyBreakdown | None = None
    q_star: float | None = None
    diagnostics: dict = field(default_factory=dict)
    reason: str | None = None


def _numerator(s: ScenarioConfig, scheme: str, outage_values: np.ndarray) -> float:
    """Delivered-bits numerator per slot-normalized objective (no T factor)."""
    if scheme == "mdnc":
        return s.M * s.alpha0 * (1.0 - float(outage_values[0]))
    return s.alpha0 * float(np.sum(1.0 - outage_values))


def _energy_of(s, scheme, schedule, powers) -> EnergyBreakdown:
    return total_energy(s, schedule, powers) if scheme == "mdnc" else nonc_energy(s, schedule, powers)


def _exact_outage_of(s, coeffs, scheme, schedule, powers):
    if scheme == "mdnc":
        return outage_exact(s, coeffs, schedule, powers).total
    return nonc_outage(coeffs, schedule, powers)


def _assemble_solution(s, coeffs, scheme, target, schedule, sol: PrimalSolution,
                       q: float, diagnostics: dict) -> Solution:
    e = _energy_of(s, scheme, schedule, sol.powers)
    exact = _exact_outage_of(s, coeffs, scheme, schedule, sol.powers)
    if scheme == "mdnc":
        ee = s.M * s.alpha0 * s.T * (1.0 - exact) / e.e_tot
        approx = float(sol.outage_approx[0])
    else:
        ee = s.alpha0 * s.T * float(np.sum(1.0 - exact)) / e.e_tot
        approx = sol.outage_approx.copy()
    return Solution(feasible=True, scheme=scheme, target=target, schedule=schedule,
                    powers=sol.powers, ee=ee, pr_out_exact=exact, pr_out_approx=approx,
                    energy=e, q_star=q, diagnostics=diagnostics)


def _initial_q(s, coeffs, scheme, target, bounds, include_user_energy) -> tuple[float, RelaySchedule]:
    """Starting ratio from the best minimal subset at full power.

    Using the ratio of an admissible point keeps the q-sequence nondecreasing
    from the first update on. Falls back to q = 0 when the max-power point
    violates the approximate-outage cap (the first inner solve then behaves
    as pure outage minimization).
    """
    schedule = RelaySchedule.from_indices(bounds.best_subset, s.N)
    pp = assemble_primal(s, coeffs, schedule, 0.0, target=target, scheme=scheme,
                         include_user_energy=include_user_energy)
    if not pp.feasible:
        return 0.0, schedule
    x_hi = np.clip(pp.max_slack_point, pp.lo, pp.hi)
    powers = pp.powers(x_hi)
    e = _energy_of(s, scheme, schedule, powers)
    numer = _numerator(s, scheme, pp.outage_at(x_hi))
    return max(numer / e.e_tot, 0.0), schedule


def _dinkelbach_loop(s, scheme, inner_solve, q0: float, warm: RelaySchedule):
    """Shared q-iteration: inner_solve(q, warm) -> (schedule, PrimalSolution, info).

    Stops when the inner maximum of V(q) is within tolerance of zero; the
    reported q is then the incumbent's own bits/energy ratio.
    """
    q = q0
    schedule = warm
    q_history: list[float] = []
    v_history: list[float] = []
    infos: list[dict] = []
    tol = DINKELBACH_TOL_REL * s.M * s.alpha0
    for theta in range(1, DINKELBACH_MAX_ITER + 1):
        schedule, sol, info = inner_solve(q, schedule)
        e = _energy_of(s, scheme, schedule, sol.powers)
        numer = _numerator(s, scheme, np.atleast_1d(sol.outage_approx))
        v = numer - q * e.e_tot
        q_history.append(q)
        v_history.append(v)
        infos.append(info)
        if abs(v) <= tol:
            diagnostics = {
                "dinkelbach_iterations": theta,
                "q_history": q_history,
                "v_history": v_history,
                "inner": infos,
            }
            return schedule, sol, diagnostics, numer / e.e_tot
        q = numer / e.e_tot
    raise RuntimeError(
        f"parametric q-iteration did not converge in {DINKELBACH_MAX_ITER} rounds "
        f"(last V = {v_history[-1]:.3e}, q = {q:.6e})")


def dinkelbach_solve(s: ScenarioConfig, coeffs: LinkCoefficients, target: float,
                     scheme: str = "mdnc", include_user_energy: bool = False) -> Solution:
    """Full pipeline: count bounds, then q-iterations with a GOA inner solve.

    Each new q warm-starts from the previous incumbent schedule. Returns the
    final operating point with the exact outage re-evaluated at the returned
    powers; the approximate-vs-exact gap is surfaced in the solution fields.
    """
    bounds = relay_count_bounds(s, coeffs, target, scheme)
    if not bounds.feasible:
        return Solution(feasible=False, scheme=scheme, target=target,
                        reason=f"no admissible relay count (low={bounds.low}, up={bounds.up})")

    q0, schedule0 = _initial_q(s, coeffs, scheme, target, bounds, include_user_energy)
    states: list[GoaState] = []

    def inner(q, warm):
        st = goa_solve(s, coeffs, q, target, scheme=scheme, bounds=bounds,
                       warm_schedule=warm, include_user_energy=include_user_energy)
        states.append(st)
        if st.incumbent is None:
            raise _InfeasibleInner(st.termination)
        info = {
            "goa_iterations": st.iteration,
            "cuts": len(st.cuts),
            "newton_iterations": st.newton_total,
            "ubd_history": list(st.ubd_history),
            "lbd_history": list(st.lbd_history),
            "visited": list(st.visited),
            "termination": st.termination,
        }
        return st.incumbent_schedule, st.incumbent, info

    try:
        schedule, sol, diagnostics, q_final = _dinkelbach_loop(s, scheme, inner, q0, schedule0)
    except _InfeasibleInner as exc:
        return Solution(feasible=False, scheme=scheme, target=target,
                        reason=f"no schedule satisfies the approximate outage cap: {exc}")
    diagnostics["goa_states"] = len(states)
    diagnostics["newton_total"] = sum(st.newton_total for st in states)
    diagnostics["cuts_total"] = sum(len(st.cuts) for st in states)
    return _assemble_solution(s, coeffs, scheme, target, schedule, sol, q_final, diagnostics)


class _InfeasibleInner(Exception):
    pass


def nonc_solve(s: ScenarioConfig, coeffs: LinkCoefficients, target: float,
               include_user_energy: bool = False) -> Solution:
    """NoNC baseline through the same pipeline, per-user outage caps."""
    return dinkelbach_solve(s, coeffs, target, scheme="nonc",
                            include_user_energy=include_user_energy)


def dinkelbach_fixed_schedule(s: ScenarioConfig, coeffs: LinkCoefficients,
                              schedule: RelaySchedule, target: float, scheme: str = "mdnc",
                              include_user_energy: bool = False) -> Solution | None:
    """q-iterations with the schedule frozen (no master): the per-subset solver
    the brute-force oracle is built on. None when the subset is infeasible."""
    pp0 = assemble_primal(s, coeffs, schedule, 0.0, target=target, scheme=scheme,
                          include_user_energy=include_user_energy)
    if not pp0.feasible:
        return None
    x_hi = np.clip(pp0.max_slack_point, pp0.lo, pp0.hi)
    powers = pp0.powers(x_hi)
    q0 = max(_numerator(s, scheme, pp0.outage_at(x_hi)) / _energy_of(s, scheme, schedule, powers).e_tot, 0.0)

    newton = {"total": 0}

    def inner(q, warm):
        pp = assemble_primal(s, coeffs, schedule, q, target=target, scheme=scheme,
                             include_user_energy=include_user_energy)
        sol = solve_primal(pp)
        newton["total"] += sol.newton_iterations
        return schedule, sol, {"newton_iterations": sol.newton_iterations}

    schedule, sol, diagnostics, q_final = _dinkelbach_loop(s, scheme, inner, q0, schedule)
    diagnostics["newton_total"] = newton["total"]
    return _assemble_solution(s, coeffs, scheme, target, schedule, sol, q_final, diagnostics)
