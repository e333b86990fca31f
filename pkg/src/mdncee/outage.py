"""Outage probability of the two-hop network, exact and approximated.

Exact MDNC rule: the BS recovers all M user messages iff at least M selected
relays complete both hops, i.e. decode every user codeword in the first hop
and get their network codeword through in the second. The outage splits by
the number K of fully-decoding relays:

* K < M  -- hopeless regardless of the second hop;
* K >= M -- outage iff fewer than M of those K succeed in the second hop.

High-SNR approximation: success factors are replaced by 1, first-hop failure
factors 1 - rho_j by sum_i c_ij/p_i, and second-hop failures by
c_j/(c_j + u_j p'_j), which turns the whole expression into a posynomial in
1/p_i and 1/(1 + u_j p'_j / c_j); its log-domain image is convex.

NoNC baseline: each relay forwards each user's message separately, so user i
is in outage iff no relay carries its message end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .model import LinkCoefficients, ScenarioConfig
from .posynomial import Posynomial

__all__ = [
    "RelaySchedule",
    "PowerAllocation",
    "OutageBreakdown",
    "link_outage",
    "relay_decode_prob",
    "prob_zeta_K",
    "prob_varsigma_given_zeta",
    "outage_exact",
    "outage_approx_power",
    "outage_approx_logdomain",
    "nonc_outage",
    "outage_posynomial",
    "nonc_outage_posynomials",
    "powers_to_log",
    "powers_from_log",
]

@dataclass(frozen=True)
class RelaySchedule:
    """Binary relay selection: u[j] = 1 iff relay j transmits this round."""

    u: np.ndarray
    theta: tuple[int, ...] = field(init=False)
    count: int = field(init=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=int)
        if u.ndim != 1 or not np.all((u == 0) | (u == 1)):
            raise ValueError("schedule vector must be one-dimensional and 0/1-valued")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "theta", tuple(int(j) for j in np.flatnonzero(u)))
        object.__setattr__(self, "count", int(u.sum()))

    @classmethod
    def from_indices(cls, indices, n: int) -> "RelaySchedule":
        u = np.zeros(n, dtype=int)
        for j in indices:
            if not 0 <= j < n:
                raise ValueError(f"relay index {j} outside 0..{n - 1}")
            u[j] = 1
        return cls(u)


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit powers: p[i] per user (W), p_relay[j] per relay (W, 0 if unselected)."""

    p: np.ndarray
    p_relay: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "p_relay", np.asarray(self.p_relay, dtype=float))

    def check(self, s: ScenarioConfig, schedule: RelaySchedule) -> None:
        if np.any(self.p <= 0) or np.any(self.p > s.P_S_max):
            raise ValueError("user powers must satisfy 0 < p_i <= P_S_max")
        if np.any(self.p_relay < 0) or np.any(self.p_relay > schedule.u * s.P_R_max):
            raise ValueError("relay powers must satisfy 0 <= p'_j <= u_j * P_R_max")


def powers_to_log(coeffs: LinkCoefficients, schedule: RelaySchedule, powers: PowerAllocation):
    """Map natural powers to the log-domain variables (ptilde, ptilde_relay).

    ptilde_i = ln p_i; ptilde'_j solves u_j p'_j = c_j e^(ptilde'_j) - c_j, so
    ptilde'_j = ln(1 + u_j p'_j / c_j) (0 for unselected relays).
    """
    ptilde = np.log(powers.p)
    ptilde_relay = np.log1p(schedule.u * powers.p_relay / coeffs.c_g)
    return ptilde, ptilde_relay


def powers_from_log(coeffs: LinkCoefficients, schedule: RelaySchedule, ptilde, ptilde_relay) -> PowerAllocation:
    """Inverse of powers_to_log; round-trips to relative 1e-12."""
    p = np.exp(np.asarray(ptilde, dtype=float))
    p_relay = coeffs.c_g * np.expm1(np.asarray(ptilde_relay, dtype=float)) * schedule.u
    return PowerAllocation(p=p, p_relay=p_relay)


# ---------------------------------------------------------------------------
# Exact expressions


def link_outage(c: float, p: float) -> float:
    """Failure probability 1 - exp(-c/p) of a single Rayleigh link; 1 at p = 0."""
    if c <= 0:
        raise ValueError("link coefficient must be positive")
    if p < 0:
        raise ValueError("power must be nonnegative")
    if p == 0.0:
        return 1.0
    return -math.expm1(-c / p)


def relay_decode_prob(c_col, p) -> float:
    """Probability exp(-sum_i c_ij/p_i) that one relay decodes all M messages."""
    c_col = np.asarray(c_col, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("all user powers must be positive")
    return math.exp(-math.fsum(c_col / p))


def prob_zeta_K(schedule: RelaySchedule, rho, K: int) -> float:
    """Probability that exactly K of the selected relays decode all messages."""
    if not 0 <= K <= schedule.count:
        raise ValueError(f"K={K} outside 0..{schedule.count}")
    rho = {j: float(r) for j, r in zip(schedule.theta, np.asarray(rho, dtype=float).ravel())}
    terms = []
    for phi in combinations(schedule.theta, K):
        inside = set(phi)
        prod = 1.0
        for j in schedule.theta:
            prod *= rho[j] if j in inside else (1.0 - rho[j])
        terms.append(prod)
    return math.fsum(terms)


def prob_varsigma_given_zeta(phi_K, pr_e_g, tau: int) -> float:
    """Probability that exactly tau of the relays in phi_K survive the second hop.

    pr_e_g maps each relay in phi_K (in order) to its second-hop outage.
    """
    phi_K = tuple(phi_K)
    if not 0 <= tau <= len(phi_K):
        raise ValueError(f"tau={tau} outside 0..{len(phi_K)}")
    pe = {j: float(e) for j, e in zip(phi_K, np.asarray(pr_e_g, dtype=float).ravel())}
    terms = []
    for psi in combinations(phi_K, tau):
        inside = set(psi)
        prod = 1.0
        for j in phi_K:
            prod *= (1.0 - pe[j]) if j in inside else pe[j]
        terms.append(prod)
    return math.fsum(terms)


@dataclass(frozen=True)
class OutageBreakdown:
    """Structured exact-outage evaluation.

    pr_A covers K < M (too few relays decode), pr_B covers K >= M with fewer
    than M second-hop survivors; total = pr_A + pr_B. zeta[K] is the
    probability that exactly K selected relays decode everything. pr_e_h and
    pr_e_g are the per-link failure probabilities (pr_e_g[j] = 1 for
    unselected relays). certain_outage flags schedules with fewer than M
    relays, for which the BS can never collect M codewords.
    """

    pr_A: float
    pr_B: float
    total: float
    zeta: np.ndarray
    pr_e_h: np.ndarray
    pr_e_g: np.ndarray
    rho: np.ndarray
    certain_outage: bool = False


def _per_link_failures(s: ScenarioConfig, coeffs: LinkCoefficients,
                       schedule: RelaySchedule, powers: PowerAllocation):
    pr_e_h = np.empty((s.M, s.N))
    for i in range(s.M):
        for j in range(s.N):
            pr_e_h[i, j] = link_outage(coeffs.c_h[i, j], powers.p[i])
    pr_e_g = np.array([
        link_outage(coeffs.c_g[j], powers.p_relay[j] if schedule.u[j] else 0.0)
        for j in range(s.N)
    ])
    return pr_e_h, pr_e_g


def outage_exact(s: ScenarioConfig, coeffs: LinkCoefficients,
                 schedule: RelaySchedule, powers: PowerAllocation) -> OutageBreakdown:
    """Exact network outage probability, split into cases A and B.

    Sums over every decode subset Phi of the selected relays, weighting by
    prod rho / (1-rho), and for |Phi| >= M over every second-hop survivor
    subset of size < M. Plain linear-space probability arithmetic with
    compensated summation.
    """
    if schedule.count == 0:
        raise ValueError("schedule selects no relays")
    pr_e_h, pr_e_g = _per_link_failures(s, coeffs, schedule, powers)
    rho = np.array([relay_decode_prob(coeffs.c_h[:, j], powers.p) for j in schedule.theta])

    if schedule.count < s.M:
        zeta = np.array([prob_zeta_K(schedule, rho, K) for K in range(schedule.count + 1)])
        return OutageBreakdown(pr_A=1.0, pr_B=0.0, total=1.0, zeta=zeta,
                               pr_e_h=pr_e_h, pr_e_g=pr_e_g, rho=rho, certain_outage=True)

    rho_of = dict(zip(schedule.theta, rho))
    zeta_terms: list[list[float]] = [[] for _ in range(schedule.count + 1)]
    a_terms: list[float] = []
    b_terms: list[float] = []
    for K in range(schedule.count + 1):
        for phi in combinations(schedule.theta, K):
            inside = set(phi)
            w = 1.0
            for j in schedule.theta:
                w *= rho_of[j] if j in inside else (1.0 - rho_of[j])
            zeta_terms[K].append(w)
            if K < s.M:
                a_terms.append(w)
            else:
                pe_phi = [pr_e_g[j] for j in phi]
                fail2 = math.fsum(prob_varsigma_given_zeta(phi, pe_phi, tau) for tau in range(s.M))
                b_terms.append(w * fail2)

    zeta = np.array([math.fsum(t) for t in zeta_terms])
    pr_A = math.fsum(a_terms)
    pr_B = math.fsum(b_terms)
    return OutageBreakdown(pr_A=pr_A, pr_B=pr_B, total=pr_A + pr_B, zeta=zeta,
                           pr_e_h=pr_e_h, pr_e_g=pr_e_g, rho=rho)


# ---------------------------------------------------------------------------
# High-SNR approximation


def outage_approx_power(coeffs: LinkCoefficients, schedule: RelaySchedule,
                        powers: PowerAllocation) -> float:
    """High-SNR approximation evaluated in natural power variables.

    First-hop failure factors become f_j = sum_i c_ij/p_i, second-hop failures
    e_j = c_j/(c_j + u_j p'_j); all success factors are 1. The case-B inner sum
    runs over survivor subsets psi of each decode subset Phi.
    """
    M = coeffs.c_h.shape[0]
    f = {j: math.fsum(coeffs.c_h[:, j] / powers.p) for j in schedule.theta}
    e = {j: coeffs.c_g[j] / (coeffs.c_g[j] + schedule.u[j] * powers.p_relay[j])
         for j in schedule.theta}
    terms = []
    for K in range(schedule.count + 1):
        for phi in combinations(schedule.theta, K):
            inside = set(phi)
            first = 1.0
            for j in schedule.theta:
                if j not in inside:
                    first *= f[j]
            if K < M:
                terms.append(first)
            else:
                inner = []
                for tau in range(M):
                    for psi in combinations(phi, tau):
                        survived = set(psi)
                        prod = 1.0
                        for j in phi:
                            if j not in survived:
                                prod *= e[j]
                        inner.append(prod)
                terms.append(first * math.fsum(inner))
    return math.fsum(terms)


_POSY_CACHE: dict = {}


def outage_posynomial(coeffs: LinkCoefficients, selected, M: int) -> Posynomial:
    """Approximate outage as a posynomial in x = (ptilde_1..M, ptilde'_j for j in selected).

    Substituting p_i = e^(ptilde_i) and u_j p'_j = c_j e^(ptilde'_j) - c_j turns
    f_j into sum_i c_ij e^(-ptilde_i) and e_j into e^(-ptilde'_j). Results are
    memoized per coefficient set (sweeps revisit the same schedules often).
    """
    selected = tuple(selected)
    key = ("mdnc", coeffs.c_h.tobytes(), coeffs.c_g.tobytes(), selected, M)
    cached = _POSY_CACHE.get(key)
    if cached is not None:
        return cached
    dim = M + len(selected)
    col = {j: M + k for k, j in enumerate(selected)}
    one = Posynomial.constant(1.0, dim)

    f: dict[int, Posynomial] = {}
    e: dict[int, Posynomial] = {}
    for j in selected:
        f[j] = Posynomial(
            coeffs.c_h[:, j].copy(),
            -np.eye(M, dim),
            dim,
        )
        e[j] = Posynomial.single_var(1.0, col[j], -1.0, dim)

    total = Posynomial.constant(0.0, dim)
    for K in range(len(selected) + 1):
        for phi in combinations(selected, K):
            inside = set(phi)
            first = one
            for j in selected:
                if j not in inside:
                    first = first * f[j]
            if K < M:
                total = total + first
            else:
                inner = Posynomial.constant(0.0, dim)
                for tau in range(M):
                    for psi in combinations(phi, tau):
                        survived = set(psi)
                        prod = one
                        for j in phi:
                            if j not in survived:
                                prod = prod * e[j]
                        inner = inner + prod
                total = total + first * inner
    total = total.merged()
    _POSY_CACHE[key] = total
    return total


def outage_approx_logdomain(coeffs: LinkCoefficients, schedule: RelaySchedule,
                            ptilde, ptilde_relay) -> float:
    """Approximate outage in the log-domain variables.

    `ptilde_relay` holds the selected relays' variables in schedule order and
    must be >= 0 so the implied real power c_j e^(ptilde'_j) - c_j is >= 0.
    Equals outage_approx_power after substitution to relative 1e-10.
    """
    ptilde = np.asarray(ptilde, dtype=float)
    ptilde_relay = np.asarray(ptilde_relay, dtype=float)
    if np.any(ptilde_relay < 0):
        raise ValueError("log-domain relay variables must be >= 0")
    M = coeffs.c_h.shape[0]
    pos = outage_posynomial(coeffs, schedule.theta, M)
    return pos.value(np.concatenate([ptilde, ptilde_relay]))


# ---------------------------------------------------------------------------
# NoNC baseline


def nonc_outage(coeffs: LinkCoefficients, schedule: RelaySchedule,
                powers: PowerAllocation) -> np.ndarray:
    """Per-user outage without network coding.

    User i fails iff no selected relay carries its message through both hops:
    Pr_out_i = prod_j (1 - (1 - Pe_ij)(1 - Pe_j)).
    """
    M = coeffs.c_h.shape[0]
    out = np.ones(M)
    if schedule.count == 0:
        return out
    for i in range(M):
        prob = 1.0
        for j in schedule.theta:
            ok_1 = math.exp(-coeffs.c_h[i, j] / powers.p[i])
            p_rel = powers.p_relay[j] if schedule.u[j] else 0.0
            ok_2 = math.exp(-coeffs.c_g[j] / p_rel) if p_rel > 0 else 0.0
            prob *= 1.0 - ok_1 * ok_2
        out[i] = prob
    return out


def nonc_outage_posynomials(coeffs: LinkCoefficients, selected, M: int) -> list[Posynomial]:
    """Per-user high-SNR NoNC outage posynomials.

    1 - (1-Pe_ij)(1-Pe_j) = Pe_ij + Pe_j - Pe_ij Pe_j is approximated by the
    posynomial upper bound Pe_ij + Pe_j = c_ij e^(-ptilde_i) + e^(-ptilde'_j);
    the cross term is second-order at high SNR.
    """
    selected = tuple(selected)
    key = ("nonc", coeffs.c_h.tobytes(), coeffs.c_g.tobytes(), selected, M)
    cached = _POSY_CACHE.get(key)
    if cached is not None:
        return cached
    dim = M + len(selected)
    result = []
    for i in range(M):
        prod = Posynomial.constant(1.0, dim)
        for k, j in enumerate(selected):
            e_i = np.zeros(dim)
            e_i[i] = -1.0
            e_j = np.zeros(dim)
            e_j[M + k] = -1.0
            factor = Posynomial([coeffs.c_h[i, j], 1.0], np.vstack([e_i, e_j]), dim)
            prod = prod * factor
        result.append(prod.merged())
    _POSY_CACHE[key] = result
    return result
