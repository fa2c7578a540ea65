"""Space and time costs of deterministic ({0,1}-valued) stochastic matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInput
from .linalg import Lindbladian
from .quantum_embed import (
    MarkovianRealization,
    Stage,
    classical_stage,
    identity_realization,
    realization,
    unitary_log_hamiltonian,
)


def function_map(table, d: int | None = None) -> np.ndarray:
    f = np.asarray(table, dtype=np.int64)
    if f.ndim != 1 or f.size == 0:
        raise InvalidInput("function table must be a non-empty 1-d integer array")
    d = f.size if d is None else d
    if f.size != d or f.min() < 0 or f.max() >= d:
        raise InvalidInput("function values must lie in [0, d)")
    return f


def function_matrix(f) -> np.ndarray:
    """The {0,1}-valued stochastic matrix P_f with P[f(j), j] = 1."""
    f = function_map(f)
    P = np.zeros((f.size, f.size))
    P[f, np.arange(f.size)] = 1.0
    return P


@dataclass(frozen=True)
class FunctionStats:
    fix: int
    img: int
    cycles: int


def count_cycles(f) -> int:
    """Number of cycles of the functional graph (one per weak component)."""
    f = function_map(f)
    d = f.size
    state = np.zeros(d, dtype=np.int8)  # 0 new, 1 on current walk, 2 done
    cycles = 0
    for start in range(d):
        if state[start]:
            continue
        x = start
        path = []
        while state[x] == 0:
            state[x] = 1
            path.append(x)
            x = int(f[x])
        if state[x] == 1:
            cycles += 1
        for y in path:
            state[y] = 2
    return cycles


def function_stats(f) -> FunctionStats:
    f = function_map(f)
    fix = int(np.count_nonzero(f == np.arange(f.size)))
    img = int(np.unique(f).size)
    return FunctionStats(fix, img, count_cycles(f))


@dataclass(frozen=True)
class ClassicalCost:
    """Time cost with m memory states; ``infinite`` means no finite implementation."""

    m: int
    lo: int | None
    hi: int | None
    lower_bound: int | None
    infinite: bool = False

    @property
    def interval(self):
        return (self.lo, self.hi)


def _ceil_div(num: int, den: int) -> int:
    return -(-num // den)


def classical_time_cost_from_stats(stats: FunctionStats, d: int, m: int, identity=False) -> ClassicalCost:
    """Evaluate the classical time-cost formula in exact integer arithmetic."""
    if m < 0:
        raise InvalidInput("memory count must be non-negative")
    if identity:
        return ClassicalCost(m, 0, 0, 0)
    den = m + d - stats.img
    if den <= 0:
        return ClassicalCost(m, None, None, None, infinite=True)
    lo = _ceil_div(m + d + max(stats.cycles - m, 0) - stats.fix, den)
    bound = _ceil_div(m + d - stats.fix, den)
    # the extra b_f(m) in {0, 1} is left unresolved
    return ClassicalCost(m, lo, lo + 1, bound)


def classical_time_cost(f, m: int) -> ClassicalCost:
    f = function_map(f)
    identity = bool(np.all(f == np.arange(f.size)))
    return classical_time_cost_from_stats(function_stats(f), f.size, m, identity)


def decompose_function(f) -> tuple[np.ndarray, np.ndarray]:
    """Split f = f_I o f_pi with f_pi a bijection and f_I idempotent.

    Image elements y_1..y_r come first (ascending), followed by the elements
    outside the image; the j-th preimage of y_k (j >= 2) is sent by f_pi to a
    distinct non-image element, which f_I then folds back onto y_k.
    """
    f = function_map(f)
    d = f.size
    image = np.unique(f)
    r = image.size
    y = np.concatenate([image, np.setdiff1d(np.arange(d), image)])
    f_pi = np.empty(d, dtype=np.int64)
    f_I = np.arange(d, dtype=np.int64)
    n = r  # n_k = r + sum_{l<k} (d_l - 1)
    for k in range(r):
        pre = np.flatnonzero(f == y[k])
        f_pi[pre[0]] = y[k]
        for j, x in enumerate(pre[1:], start=1):
            f_pi[x] = y[n + j - 1]
            f_I[y[n + j - 1]] = y[k]
        n += pre.size - 1
    return f_pi, f_I


def idempotent_generator(f_I) -> np.ndarray:
    """Rate matrix moving every non-fixed point of an idempotent map to its image."""
    f_I = function_map(f_I)
    d = f_I.size
    L = np.zeros((d, d))
    for l in range(d):
        if f_I[l] != l:
            L[l, l] = -1.0
            L[f_I[l], l] = 1.0
    return L


def quantum_realization_of_function(f, t_trunc: float = 30.0) -> MarkovianRealization:
    """Two-stage memoryless realisation: a unitary permutation, then relaxation."""
    if t_trunc <= 0:
        raise InvalidInput("t_trunc must be positive")
    f = function_map(f)
    d = f.size
    target = function_matrix(f)
    if np.all(f == np.arange(d)):
        return identity_realization(d)
    f_pi, f_I = decompose_function(f)
    stages = []
    if np.any(f_pi != np.arange(d)):
        H = unitary_log_hamiltonian(function_matrix(f_pi))
        stages.append(Stage(Lindbladian(H), 1.0, "unitary"))
    if np.any(f_I != np.arange(d)):
        stage = classical_stage(idempotent_generator(f_I), math.inf, t_trunc=t_trunc)
        stages.append(stage)
    return realization(stages, target)


@dataclass(frozen=True)
class Typicality:
    d: int
    trials: int
    mean_img: float
    se_img: float
    mean_fix: float
    se_fix: float
    expected_img: float
    expected_fix: float
    # standard errors implied by the binomial variances
    sigma_img: float
    sigma_fix: float

    @property
    def img_z(self) -> float:
        return (self.mean_img - self.expected_img) / self.sigma_img if self.sigma_img else 0.0

    @property
    def fix_z(self) -> float:
        return (self.mean_fix - self.expected_fix) / self.sigma_fix if self.sigma_fix else 0.0


def typicality_sample(d: int, trials: int, seed: int = 0, chunk: int = 256) -> Typicality:
    """Image size and fixed-point statistics of uniformly random functions on Z_d."""
    if trials < 1 or d < 1:
        raise InvalidInput("need d >= 1 and trials >= 1")
    rng = np.random.default_rng(seed)
    imgs = np.empty(trials)
    fixes = np.empty(trials)
    ar = np.arange(d)
    for start in range(0, trials, chunk):
        n = min(chunk, trials - start)
        F = rng.integers(0, d, size=(n, d))
        hit = np.zeros((n, d), dtype=bool)
        hit[np.arange(n)[:, None], F] = True
        imgs[start : start + n] = hit.sum(axis=1)
        fixes[start : start + n] = (F == ar).sum(axis=1)
    q = 1.0 / math.e
    var_img = d * q * (1 - q)
    var_fix = 1.0 - 1.0 / d
    se = lambda x: float(x.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return Typicality(
        d,
        trials,
        float(imgs.mean()),
        se(imgs),
        float(fixes.mean()),
        se(fixes),
        d * (1 - q),
        1.0,
        math.sqrt(var_img / trials),
        math.sqrt(var_fix / trials),
    )


def named_function_stats(name: str, bits: int) -> tuple[FunctionStats, int]:
    """Closed-form statistics of f1(i) = i + 1 mod 2^s and f2(i) = min(i + 2^(s/2), 2^s - 1)."""
    if bits < 1:
        raise InvalidInput("bits must be >= 1")
    d = 1 << bits
    if name == "f1":
        return FunctionStats(fix=0, img=d, cycles=1), d
    if name == "f2":
        shift = 1 << (bits // 2)
        if shift >= d:
            return FunctionStats(fix=1, img=1, cycles=1), d
        # image is [shift, d - 1]; the only fixed point (and cycle) is d - 1
        return FunctionStats(fix=1, img=d - shift, cycles=1), d
    raise InvalidInput(f"unknown named function {name!r}")


def named_function_table(name: str, bits: int) -> np.ndarray:
    d = 1 << bits
    i = np.arange(d, dtype=np.int64)
    if name == "f1":
        return (i + 1) % d
    if name == "f2":
        return np.minimum(i + (1 << (bits // 2)), d - 1)
    raise InvalidInput(f"unknown named function {name!r}")


@dataclass(frozen=True)
class TradeoffRow:
    m: int
    classical: ClassicalCost
    quantum_cost: int  # upper bound valid for every function
    quantum_stages: int  # stages used by the explicit construction
    quantum_memory: int
    lower_bound_exact: tuple  # (numerator, denominator) before the ceiling


def tradeoff_table(
    stats: FunctionStats, d: int, m_values: Sequence[int], identity: bool = False
) -> list[TradeoffRow]:
    rows = []
    stages = 0 if identity else (1 if stats.img == d else 2)
    for m in m_values:
        cost = classical_time_cost_from_stats(stats, d, int(m), identity)
        den = m + d - stats.img
        rows.append(TradeoffRow(int(m), cost, 2, stages, 0, (m + d - stats.fix, den)))
    return rows


def named_tradeoff_table(name: str, bits: int, m_values: Sequence[int]) -> list[TradeoffRow]:
    stats, d = named_function_stats(name, bits)
    return tradeoff_table(stats, d, m_values)


def function_tradeoff_table(f, m_values: Sequence[int]) -> list[TradeoffRow]:
    f = function_map(f)
    identity = bool(np.all(f == np.arange(f.size)))
    return tradeoff_table(function_stats(f), f.size, m_values, identity)
