"""Explicit Markovian quantum realisations of stochastic matrices.

A realisation is a list of stages, each a time-independent Lindbladian run
for a duration. The classical process is read off by preparing ``|j><j|``,
running every stage and measuring in the computational basis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .embeddability import (
    check_circulant3,
    check_embeddable_2x2,
    check_unistochastic_circulant3,
    circulant3,
    circulant_params,
)
from .errors import InvalidInput
from .linalg import (
    T_TRUNC,
    Lindbladian,
    dephasing_channel,
    expm,
    lindblad_propagator,
    stochastic_matrix,
    superop_to_stochastic,
)

UNITARY_TOL = 1e-10
T_DEPHASE = 40.0


@dataclass(frozen=True, eq=False)
class Stage:
    lindbladian: Lindbladian
    duration: float
    kind: str = "lindblad"  # unitary | classical | dephasing | lindblad
    # a classical stage that only reaches its target as t -> inf, cut at ``duration``
    truncated: bool = False
    generator: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.lindbladian.dim


@dataclass(frozen=True, eq=False)
class MarkovianRealization:
    stages: tuple
    target: np.ndarray
    achieved_error: float

    @property
    def dim(self) -> int:
        return self.target.shape[0]

    def channel_superoperator(self) -> np.ndarray:
        return lindblad_propagator([(s.lindbladian, s.duration) for s in self.stages])

    def extract(self) -> np.ndarray:
        """Stochastic matrix produced by running every stage."""
        if not self.stages:
            return np.eye(self.dim)
        return superop_to_stochastic(self.channel_superoperator(), self.dim)

    def n_stages(self, count_dephasing: bool = True) -> int:
        return sum(1 for s in self.stages if count_dephasing or s.kind != "dephasing")


def realization(stages, target) -> MarkovianRealization:
    """Bundle stages with their target; the error is measured, never assumed."""
    target = stochastic_matrix(target)
    stages = tuple(stages)
    if any(s.dim != target.shape[0] for s in stages):
        raise InvalidInput("stage dimension does not match the target")
    out = MarkovianRealization(stages, target, 0.0)
    err = float(np.abs(out.extract() - target).max())
    return replace(out, achieved_error=err)


def identity_realization(d: int) -> MarkovianRealization:
    return realization([Stage(Lindbladian.zero(d), 0.0, "unitary")], np.eye(d))


def cyclic_shift(d: int, m: int) -> np.ndarray:
    """Permutation matrix sending |n> to |n + m mod d>."""
    return np.roll(np.eye(d), m % d, axis=0)


def permutation_hamiltonian(d: int, m: int = 1) -> np.ndarray:
    """Hamiltonian H with exp(i H m) equal to the cyclic shift by m.

    H is diagonal in the Fourier basis with eigenvalues 2 pi n / d; the same H
    serves every shift, which is then reached at time m.
    """
    if d < 2:
        raise InvalidInput("need d >= 2")
    if not 0 <= m <= d - 1:
        raise InvalidInput("shift must satisfy 0 <= m <= d - 1")
    k = np.arange(d)
    # columns are the Fourier vectors psi_n with entries e^{-2 pi i k n / d} / sqrt(d)
    F = np.exp(-2j * np.pi * np.outer(k, k) / d) / math.sqrt(d)
    return (F * (2 * np.pi * k / d)) @ F.conj().T


def unitary_log_hamiltonian(U, t: float = 1.0) -> np.ndarray:
    """Hermitian H with exp(-i H t) = U, from the principal logarithm."""
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    if np.abs(U.conj().T @ U - np.eye(d)).max() > UNITARY_TOL:
        raise InvalidInput("matrix is not unitary")
    # complex Schur form of a normal matrix is diagonal, Z unitary
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.angle(np.diag(T))
    # an eigenvalue at -1 may land on either branch; both are valid logarithms
    H = (Z * (-phases / t)) @ Z.conj().T
    return (H + H.conj().T) / 2


def unistochastic_channel(U, t: float = 1.0) -> MarkovianRealization:
    """Single Hamiltonian stage realising P_ij = |U_ij|^2."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InvalidInput("U must be square")
    H = unitary_log_hamiltonian(U, t)
    target = np.abs(U) ** 2
    target = target / target.sum(axis=0)
    return realization([Stage(Lindbladian(H), t, "unitary")], target)


def permutation_realization(perm) -> MarkovianRealization:
    """Unitary realisation of a permutation matrix (or index map j -> perm[j])."""
    perm = np.asarray(perm)
    if perm.ndim == 1:
        Pi = np.zeros((perm.size, perm.size))
        Pi[perm, np.arange(perm.size)] = 1.0
    else:
        Pi = perm.astype(float)
    return unistochastic_channel(Pi)


def classical_stage(L, duration: float, t_trunc: float = T_TRUNC) -> Stage:
    truncated = math.isinf(duration)
    t = t_trunc if truncated else float(duration)
    return Stage(Lindbladian.from_generator(L), t, "classical", truncated, np.asarray(L, float))


def dephasing_stage(d: int, t: float = T_DEPHASE) -> Stage:
    return Stage(Lindbladian.from_channel(dephasing_channel(d)), t, "dephasing")


def compose_markovian(A: MarkovianRealization, B: MarkovianRealization) -> MarkovianRealization:
    """Realisation of A.target @ B.target: B, then full dephasing, then A."""
    if A.dim != B.dim:
        raise InvalidInput("cannot compose realisations of different dimension")
    stages = B.stages + (dephasing_stage(A.dim),) + A.stages
    return realization(stages, A.target @ B.target)


SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def decompose_2x2(P, t_trunc: float = T_TRUNC) -> MarkovianRealization:
    """Every 2x2 stochastic matrix: classical if det >= 0, else swap o classical."""
    P = stochastic_matrix(P)
    if P.shape != (2, 2):
        raise InvalidInput("decompose_2x2 needs a 2x2 matrix")
    verdict = check_embeddable_2x2(P)
    if verdict.embeddable:
        (L, t), = verdict.witness
        if not L.any():
            return identity_realization(2)
        return realization([classical_stage(L, t, t_trunc)], P)
    swap = permutation_realization(SWAP)
    inner = SWAP @ P
    if np.allclose(inner, np.eye(2), atol=1e-15):
        return swap
    classical = decompose_2x2(inner, t_trunc)
    out = compose_markovian(swap, classical)
    return realization(out.stages, P)


def _lift_operator(K, pair, d):
    i, j = pair
    out = np.zeros((d, d), dtype=complex)
    idx = [i, j]
    out[np.ix_(idx, idx)] = K
    return out


def _lift_stage(stage: Stage, pair, Pi, d) -> Stage:
    lind = stage.lindbladian
    conj = lambda K: Pi @ _lift_operator(K, pair, d) @ Pi.T
    lifted = Lindbladian(conj(lind.hamiltonian), tuple(conj(K) for K in lind.cp_part))
    gen = None
    if stage.generator is not None:
        gen = Pi @ _lift_operator(stage.generator, pair, d).real @ Pi.T
    return Stage(lifted, stage.duration, stage.kind, stage.truncated, gen)


def elementary_matrix(P2, pair, perm, d: int) -> np.ndarray:
    """Pi (P2 on the pair, identity elsewhere) Pi^T."""
    Pi = _perm_matrix(perm, d)
    E = np.eye(d)
    idx = list(pair)
    E[np.ix_(idx, idx)] = P2
    return Pi @ E @ Pi.T


def _perm_matrix(perm, d):
    if perm is None:
        return np.eye(d)
    perm = np.asarray(perm)
    if perm.ndim == 2:
        return perm.astype(float)
    Pi = np.zeros((d, d))
    Pi[perm, np.arange(d)] = 1.0
    return Pi


def pinching_product(factors, d: int, t_trunc: float = T_TRUNC) -> MarkovianRealization:
    """Realise P_en ... P_e1 where factor k is (P2, (i, j), perm); the first acts first."""
    if not factors:
        return identity_realization(d)
    total = None
    for P2, pair, perm in factors:
        i, j = pair
        if i == j or not (0 <= i < d and 0 <= j < d):
            raise InvalidInput(f"bad index pair {pair} for d = {d}")
        Pi = _perm_matrix(perm, d)
        if not np.allclose(Pi.sum(axis=0), 1) or not np.allclose(Pi.sum(axis=1), 1):
            raise InvalidInput("conjugating matrix is not a permutation")
        r2 = decompose_2x2(P2, t_trunc)
        stages = [_lift_stage(s, pair, Pi, d) for s in r2.stages]
        step = realization(stages, elementary_matrix(r2.target, pair, Pi, d))
        total = step if total is None else compose_markovian(step, total)
    return total


class CirculantClass(str, enum.Enum):
    CLASSICAL = "ClassicalEmbeddable"
    PERMUTED = "QuantumViaPermutedClassical"
    UNISTOCHASTIC = "QuantumViaUnistochastic"
    UNKNOWN = "Unknown"


def permuted_circulant_params(a: float, b: float) -> list[tuple[float, float]]:
    """(a, b) of Pi P for the two non-trivial cyclic shifts Pi."""
    P = circulant3(a, b)
    return [circulant_params(cyclic_shift(3, m) @ P) for m in (1, 2)]


def classify_circulant_point(a: float, b: float) -> CirculantClass:
    """Cheapest quantum witness for the circulant (a, b), in a fixed order."""
    if check_circulant3(a, b).embeddable:
        return CirculantClass.CLASSICAL
    for a2, b2 in permuted_circulant_params(a, b):
        if check_circulant3(a2, b2).embeddable:
            return CirculantClass.PERMUTED
    if check_unistochastic_circulant3(a, b):
        return CirculantClass.UNISTOCHASTIC
    return CirculantClass.UNKNOWN


def circulant_realization(a: float, b: float, seed: int = 0) -> MarkovianRealization | None:
    """Build a realisation matching the classification of (a, b), if any."""
    from .embeddability import check_unistochastic_search

    P = circulant3(a, b)
    v = check_circulant3(a, b)
    if v.embeddable:
        return realization([classical_stage(L, t) for L, t in v.witness], P)
    for m, (a2, b2) in zip((1, 2), permuted_circulant_params(a, b)):
        v = check_circulant3(a2, b2)
        if v.embeddable:
            inner = realization([classical_stage(L, t) for L, t in v.witness], circulant3(a2, b2))
            back = permutation_realization(cyclic_shift(3, -m))
            return realization(compose_markovian(back, inner).stages, P)
    search = check_unistochastic_search(P, seed=seed)
    if search.found:
        return unistochastic_channel(search.unitary)
    return None


def classical_realization(L, duration: float = 1.0) -> MarkovianRealization:
    """Lift a classical generator run for ``duration`` into a one-stage realisation."""
    stage = classical_stage(L, duration)
    return realization([stage], expm(np.asarray(L, float), stage.duration))
