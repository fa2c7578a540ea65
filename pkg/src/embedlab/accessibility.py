"""Classical accessibility regions under a fixed point.

``accessible_with_memory`` is a literal feasibility LP over stochastic
matrices and serves as ground truth for the closed forms in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidInput, NotAccessible
from .linalg import T_TRUNC, expm, prob_vector

MAJ_SLACK = 1e-12
LP_TOL = 1e-9


def _transport_constraints(p, gamma):
    """Equality rows for vec(P) (row-major): column sums, P gamma = gamma, and the P p rows."""
    d = p.size
    A_col = np.kron(np.ones(d), np.eye(d))  # sum_i P_ij = 1
    A_gam = np.kron(np.eye(d), gamma)  # sum_j P_ij gamma_j = gamma_i
    A_p = np.kron(np.eye(d), p)  # sum_j P_ij p_j = q_i
    return A_col, A_gam, A_p


def accessible_with_memory(p, q, gamma) -> bool:
    """Is there a stochastic P with P p = q and P gamma = gamma?"""
    p, q, gamma = prob_vector(p), prob_vector(q), prob_vector(gamma)
    if not p.size == q.size == gamma.size:
        raise InvalidInput("p, q and gamma must have the same dimension")
    if np.any(gamma <= 0):
        raise InvalidInput("fixed point must be full rank")
    d = p.size
    A_col, A_gam, A_p = _transport_constraints(p, gamma)
    A = np.vstack([A_col, A_gam, A_p])
    b = np.concatenate([np.ones(d), gamma, q])
    res = linprog(
        np.zeros(d * d),
        A_eq=A,
        b_eq=b,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": LP_TOL, "dual_feasibility_tolerance": LP_TOL},
    )
    return res.status == 0


def memory_region_extent(p, gamma) -> list[tuple[float, float]]:
    """Per-coordinate [min, max] of q over the memory-assisted region, by LP."""
    p, gamma = prob_vector(p), prob_vector(gamma)
    d = p.size
    A_col, A_gam, A_p = _transport_constraints(p, gamma)
    A = np.vstack([A_col, A_gam])
    b = np.concatenate([np.ones(d), gamma])
    out = []
    for k in range(d):
        c = A_p[k]
        lo = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        hi = linprog(-c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        out.append((float(lo.fun), float(-hi.fun)))
    return out


def majorises(p, q, slack: float = MAJ_SLACK) -> bool:
    """p > q: sorted partial sums of p dominate those of q."""
    p, q = prob_vector(p), prob_vector(q)
    if p.size != q.size:
        raise InvalidInput("dimension mismatch")
    cp = np.cumsum(np.sort(p)[::-1])
    cq = np.cumsum(np.sort(q)[::-1])
    return bool(np.all(cp >= cq - slack))


def _ground_population(betaE: float) -> float:
    return 1.0 / (1.0 + math.exp(-betaE))


def qubit_memoryless_classical_interval(p: float, betaE: float) -> tuple[float, float]:
    """Ground populations reachable by classical thermalisation: the segment to 1/Z."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInput("population must lie in [0, 1]")
    g = _ground_population(betaE)
    return (min(p, g), max(p, g))


def qubit_memory_classical_interval(p: float, betaE: float) -> tuple[float, float]:
    """Ground populations reachable by any process fixing the thermal state."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInput("population must lie in [0, 1]")
    g = _ground_population(betaE)
    other = 1.0 - math.exp(-betaE) * p
    return (p, other) if p <= g else (other, p)


def partial_swap_generator(d: int, i: int, j: int) -> np.ndarray:
    """Rate matrix mixing levels i and j at rate 1/2, zero elsewhere."""
    L = np.zeros((d, d))
    L[i, i] = L[j, j] = -0.5
    L[i, j] = L[j, i] = 0.5
    return L


def partial_swap(d: int, i: int, j: int, lam: float) -> np.ndarray:
    T = np.eye(d)
    T[i, i] = T[j, j] = 1 - lam / 2
    T[i, j] = T[j, i] = lam / 2
    return T


@dataclass
class SwapSchedule:
    """A permutation followed by partial swaps (i, j, duration)."""

    d: int
    permutation: np.ndarray  # level k is sent to permutation[k]
    stages: list = field(default_factory=list)

    def permutation_matrix(self) -> np.ndarray:
        Pi = np.zeros((self.d, self.d))
        Pi[self.permutation, np.arange(self.d)] = 1.0
        return Pi

    def generators(self):
        for i, j, t in self.stages:
            yield partial_swap_generator(self.d, i, j), t

    def matrix(self, t_trunc: float = T_TRUNC) -> np.ndarray:
        P = self.permutation_matrix()
        for L, t in self.generators():
            P = expm(L, t_trunc if math.isinf(t) else t) @ P
        return P

    def apply(self, p, t_trunc: float = T_TRUNC) -> np.ndarray:
        return self.matrix(t_trunc) @ np.asarray(p, dtype=float)


def uniform_fixed_point_path(p, q, tol: float = 1e-13) -> SwapSchedule:
    """Permutation plus at most d - 1 partial swaps taking p to q (needs p > q)."""
    p, q = prob_vector(p), prob_vector(q)
    if p.size != q.size:
        raise InvalidInput("dimension mismatch")
    if not majorises(p, q):
        raise NotAccessible("p does not majorise q")
    d = p.size
    # order[r] is the level holding the r-th largest entry of q
    order = np.argsort(-q, kind="stable")
    perm = np.empty(d, dtype=np.int64)
    perm[np.argsort(-p, kind="stable")] = order
    x = np.empty(d)
    x[perm] = p
    x, y = x[order], q[order]
    sched = SwapSchedule(d, perm)
    # T-transform greedy: each step settles at least one coordinate
    for _ in range(d):
        gaps = x - y
        over = np.flatnonzero(gaps > tol)
        if over.size == 0:
            break
        i = over[0]
        under = np.flatnonzero(gaps[i + 1 :] < -tol)
        if under.size == 0:
            break
        j = i + 1 + under[0]
        delta = min(gaps[i], -gaps[j])
        half_lam = delta / (x[i] - x[j])
        lam = min(2 * half_lam, 1.0)
        t = math.inf if lam >= 1.0 else -math.log1p(-lam)
        x[i] -= delta
        x[j] += delta
        sched.stages.append((int(order[i]), int(order[j]), t))
    return sched


def majorisation_region(p) -> dict:
    """Closed-form description of the uniform-fixed-point region {q : p > q}."""
    p = prob_vector(p)
    return {
        "type": "majorisation",
        "sorted_partial_sums": np.cumsum(np.sort(p)[::-1]).tolist(),
    }
