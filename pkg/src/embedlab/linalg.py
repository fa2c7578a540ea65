"""Numerical substrate: probability vectors, stochastic and rate matrices,
quantum channels, Lindbladians and their propagation.

Conventions used everywhere in the package:

* stochastic matrices are column-stochastic, ``P[i, j]`` is the probability
  of output ``i`` given input ``j``;
* density matrices are vectorised column-major (Fortran order), so that
  ``vec(A X B) = (B.T kron A) vec(X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidInput

PROB_TOL = 1e-10
CLAMP_TOL = 1e-12
HERM_TOL = 1e-10
T_TRUNC = 40.0


def _square(M, name="matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidInput(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{name} has non-finite entries")
    return M


def prob_vector(p) -> np.ndarray:
    """Validate a probability vector; round-off negatives are clamped to 0."""
    p = np.array(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
        raise InvalidInput("probability vector must be a finite 1-d array")
    if np.any(p < -CLAMP_TOL):
        raise InvalidInput(f"negative probability {p.min():.3g}")
    p[p < 0] = 0.0
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise InvalidInput(f"probabilities sum to {p.sum():.12g}, not 1")
    return p


def stochastic_matrix(P) -> np.ndarray:
    """Validate a column-stochastic matrix, clamping round-off negatives."""
    P = np.array(_square(P, "stochastic matrix"), dtype=float)
    if np.any(P < -CLAMP_TOL):
        raise InvalidInput(f"negative transition probability {P.min():.3g}")
    P[P < 0] = 0.0
    col = P.sum(axis=0)
    if np.max(np.abs(col - 1.0)) > PROB_TOL:
        raise InvalidInput("columns of a stochastic matrix must sum to 1")
    return P


def generator_matrix(L) -> np.ndarray:
    """Validate a rate matrix: non-negative off-diagonal, zero column sums."""
    L = np.array(_square(L, "generator"), dtype=float)
    off = L - np.diag(np.diag(L))
    if np.any(off < -CLAMP_TOL):
        raise InvalidInput("generator has a negative off-diagonal rate")
    if np.max(np.abs(L.sum(axis=0))) > PROB_TOL * max(1.0, np.abs(L).max()):
        raise InvalidInput("generator columns must sum to 0")
    return L


def is_stochastic(P, tol=PROB_TOL) -> bool:
    P = np.asarray(P)
    return bool(np.all(P >= -tol) and np.allclose(P.sum(axis=0), 1.0, rtol=0, atol=tol))


def is_hermitian(M, tol=HERM_TOL) -> bool:
    M = np.asarray(M)
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol)


def density_matrix(rho) -> np.ndarray:
    rho = np.array(_square(rho, "density matrix"), dtype=complex)
    if not is_hermitian(rho):
        raise InvalidInput("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > HERM_TOL:
        raise InvalidInput("density matrix must have unit trace")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -HERM_TOL:
        raise InvalidInput("density matrix is not positive semidefinite")
    return rho


def diag_state(p) -> np.ndarray:
    """Classical state rho_p = sum_k p_k |k><k|."""
    return np.diag(prob_vector(p)).astype(complex)


def vec(X) -> np.ndarray:
    return np.asarray(X).reshape(-1, order="F")


def unvec(v, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A completely positive map given by its Kraus operators."""

    ops: tuple

    def __init__(self, ops: Iterable):
        ops = tuple(np.array(_square(K, "Kraus operator"), dtype=complex) for K in ops)
        if not ops:
            raise InvalidInput("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        if any(K.shape != (d, d) for K in ops):
            raise InvalidInput("Kraus operators must share one shape")
        object.__setattr__(self, "ops", ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def dual_identity(self) -> np.ndarray:
        """Phi^*(1) = sum_k K^dagger K."""
        return sum(K.conj().T @ K for K in self.ops)

    def completeness_error(self) -> float:
        return float(np.abs(self.dual_identity() - np.eye(self.dim)).max())

    def is_trace_preserving(self, tol=1e-10) -> bool:
        return self.completeness_error() <= tol

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        return sum(K @ rho @ K.conj().T for K in self.ops)

    def superoperator(self) -> np.ndarray:
        return sum(np.kron(K.conj(), K) for K in self.ops)

    def compose(self, other: "KrausChannel") -> "KrausChannel":
        """Kraus set of ``self o other`` (other acts first)."""
        return KrausChannel([A @ B for A in self.ops for B in other.ops])


def dephasing_channel(d: int) -> KrausChannel:
    """Completely dephasing channel with Kraus operators |k><k|."""
    if d < 2:
        raise InvalidInput("dephasing channel needs d >= 2")
    eye = np.eye(d)
    return KrausChannel([np.outer(eye[k], eye[k]) for k in range(d)])


def unitary_channel(U) -> KrausChannel:
    return KrausChannel([U])


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel([np.eye(d)])


def channel_to_stochastic(channel: KrausChannel) -> np.ndarray:
    """P[i, j] = <i| E(|j><j|) |i>."""
    d = channel.dim
    P = np.empty((d, d))
    for j in range(d):
        proj = np.zeros((d, d), dtype=complex)
        proj[j, j] = 1.0
        P[:, j] = np.real(np.diag(channel(proj)))
    return stochastic_matrix(P)


@dataclass(frozen=True, eq=False)
class Lindbladian:
    """Generator X -> -i[H, X] + Phi(X) - 1/2 {Phi^*(1), X}.

    ``cp_part`` is a Kraus decomposition of the completely positive map Phi;
    it is not required to be trace preserving.
    """

    hamiltonian: np.ndarray
    cp_part: tuple = ()

    def __post_init__(self):
        H = np.array(_square(self.hamiltonian, "Hamiltonian"), dtype=complex)
        if not is_hermitian(H):
            raise InvalidInput("Hamiltonian is not Hermitian")
        d = H.shape[0]
        ops = tuple(np.array(K, dtype=complex) for K in self.cp_part)
        if any(K.shape != (d, d) for K in ops):
            raise InvalidInput("CP part dimension does not match the Hamiltonian")
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "cp_part", ops)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @classmethod
    def zero(cls, d: int) -> "Lindbladian":
        return cls(np.zeros((d, d)))

    @classmethod
    def from_hamiltonian(cls, H) -> "Lindbladian":
        return cls(H)

    @classmethod
    def from_generator(cls, L) -> "Lindbladian":
        """Lift a classical rate matrix: Kraus ops sqrt(L_ij)|i><j| for i != j."""
        L = generator_matrix(L)
        d = L.shape[0]
        ops = []
        for i in range(d):
            for j in range(d):
                if i != j and L[i, j] > 0:
                    K = np.zeros((d, d))
                    K[i, j] = math.sqrt(L[i, j])
                    ops.append(K)
        return cls(np.zeros((d, d)), tuple(ops))

    @classmethod
    def from_channel(cls, channel: KrausChannel) -> "Lindbladian":
        """The generator E - I of a trace-preserving channel E."""
        return cls(np.zeros((channel.dim, channel.dim)), channel.ops)

    def _dual_identity(self) -> np.ndarray:
        d = self.dim
        G = np.zeros((d, d), dtype=complex)
        for K in self.cp_part:
            G += K.conj().T @ K
        return G

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        H = self.hamiltonian
        G = self._dual_identity()
        out = -1j * (H @ X - X @ H) - 0.5 * (G @ X + X @ G)
        for K in self.cp_part:
            out += K @ X @ K.conj().T
        return out

    def superoperator(self) -> np.ndarray:
        d = self.dim
        eye = np.eye(d)
        H = self.hamiltonian
        G = self._dual_identity()
        S = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
        S -= 0.5 * (np.kron(eye, G) + np.kron(G.T, eye))
        for K in self.cp_part:
            S += np.kron(K.conj(), K)
        return S


def expm(M, t: float = 1.0) -> np.ndarray:
    """Matrix exponential of ``M * t``."""
    M = _square(M)
    if not math.isfinite(t):
        raise InvalidInput("exponentiation time must be finite")
    out = scipy.linalg.expm(M * t)
    if np.isrealobj(M):
        out = out.real
    return out


def _duration(t: float, t_trunc: float) -> float:
    if t < 0 or math.isnan(t):
        raise InvalidInput(f"negative duration {t}")
    return t_trunc if math.isinf(t) else float(t)


def propagate_classical(
    schedule: Sequence[tuple], t_trunc: float = T_TRUNC, d: int | None = None
) -> np.ndarray:
    """Ordered product of segment exponentials; the first segment acts first.

    An infinite duration is replaced by ``t_trunc``.
    """
    if not schedule:
        if d is None:
            raise InvalidInput("empty schedule needs an explicit dimension")
        return np.eye(d)
    P = None
    for L, t in schedule:
        L = generator_matrix(L)
        step = expm(L, _duration(t, t_trunc))
        P = step if P is None else step @ P
    # re-validate: clamps the tiny negatives exponentials leave behind
    return stochastic_matrix(P)


def lindblad_propagator(schedule: Sequence[tuple], t_trunc: float = T_TRUNC) -> np.ndarray:
    """Superoperator of the whole schedule (first segment acts first)."""
    S = None
    for lind, t in schedule:
        if not isinstance(lind, Lindbladian):
            raise InvalidInput("schedule entries must be (Lindbladian, duration)")
        step = expm(lind.superoperator(), _duration(t, t_trunc))
        S = step if S is None else step @ S
    return S


def propagate_lindblad(
    schedule: Sequence[tuple], rho, t_trunc: float = T_TRUNC
) -> np.ndarray:
    rho = density_matrix(rho)
    if not schedule:
        return rho
    d = rho.shape[0]
    S = lindblad_propagator(schedule, t_trunc)
    if S.shape[0] != d * d:
        raise InvalidInput("Lindbladian dimension does not match the state")
    out = unvec(S @ vec(rho), d)
    return (out + out.conj().T) / 2


def superop_to_stochastic(S, d: int) -> np.ndarray:
    """Classical transition matrix of a channel given as a superoperator."""
    P = np.empty((d, d))
    for j in range(d):
        # column-major: |j><j| sits at index j*d + j
        out = S[:, j * d + j]
        P[:, j] = np.real(out[np.arange(d) * (d + 1)])
    return P
