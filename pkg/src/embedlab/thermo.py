"""Gibbs states, free energies and the coherent share of free energy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddability import detailed_balance_threshold
from .errors import InvalidInput, MemoryRequired
from .linalg import density_matrix, prob_vector

RISE_TOL = 1e-6
MONO_SLACK = 1e-8


@dataclass(frozen=True)
class EnergySpec:
    levels: tuple
    beta: float

    def __init__(self, levels: Sequence[float], beta: float):
        levels = tuple(float(e) for e in levels)
        if not levels or not all(math.isfinite(e) for e in levels):
            raise InvalidInput("energy levels must be finite")
        if not math.isfinite(beta) or beta < 0:
            raise InvalidInput("beta must be finite and non-negative")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "beta", float(beta))

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.array(self.levels)


def gibbs_state(spec: EnergySpec) -> np.ndarray:
    w = -spec.beta * spec.energies
    w = np.exp(w - w.max())
    return w / w.sum()


def log_partition(spec: EnergySpec) -> float:
    w = -spec.beta * spec.energies
    m = w.max()
    return float(m + math.log(np.exp(w - m).sum()))


def _need_beta(spec: EnergySpec):
    if spec.beta <= 0:
        raise InvalidInput("free energy needs beta > 0")


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh((np.asarray(rho) + np.asarray(rho).conj().T) / 2)
    return shannon_entropy(np.clip(w, 0.0, None))


def free_energy(p, spec: EnergySpec) -> float:
    """sum_i p_i E_i - H(p) / beta, natural logarithm."""
    _need_beta(spec)
    p = prob_vector(p)
    if p.size != spec.dim:
        raise InvalidInput("distribution and energy levels differ in dimension")
    return float(p @ spec.energies - shannon_entropy(p) / spec.beta)


def equilibrium_free_energy(spec: EnergySpec) -> float:
    _need_beta(spec)
    return -log_partition(spec) / spec.beta


def quantum_free_energy(rho, spec: EnergySpec) -> float:
    """tr(rho H) - S(rho) / beta with H diagonal in the computational basis."""
    _need_beta(spec)
    rho = density_matrix(rho)
    if rho.shape[0] != spec.dim:
        raise InvalidInput("state and energy levels differ in dimension")
    energy = float(np.real(np.diag(rho)) @ spec.energies)
    return energy - von_neumann_entropy(rho) / spec.beta


def asymmetry(rho, spec: EnergySpec | None = None) -> float:
    """S(diag rho) - S(rho): the entropy released by dephasing."""
    rho = density_matrix(rho)
    pops = np.clip(np.real(np.diag(rho)), 0.0, None)
    return shannon_entropy(pops) - von_neumann_entropy(rho)


@dataclass
class FreeEnergyAudit:
    times: np.ndarray
    F_classical: np.ndarray
    F_quantum: np.ndarray
    asymmetry: np.ndarray
    monotone_ok: bool
    backflow_detected: bool

    @property
    def classical_minimum(self) -> int:
        return int(np.argmin(self.F_classical))

    def rows(self):
        return zip(self.times, self.F_classical, self.F_quantum, self.asymmetry)


def detect_backflow(F, rise: float = RISE_TOL) -> bool:
    """A strict interior minimum of F followed by a rise larger than ``rise``."""
    F = np.asarray(F, dtype=float)
    if F.size < 3:
        return False
    k = int(np.argmin(F))
    if k == 0 or k == F.size - 1:
        return False
    if not (F[k] < F[k - 1] and F[k] < F[k + 1]):
        return False
    return bool(F[k + 1 :].max() - F[k] > rise)


def audit_trajectory(states, spec: EnergySpec, times=None) -> FreeEnergyAudit:
    """Free-energy bookkeeping along a sampled evolution.

    ``states`` is a sequence of density matrices or anything with a
    ``densities`` attribute (such as a qubit path).
    """
    _need_beta(spec)
    rhos = list(getattr(states, "densities", states))
    if len(rhos) < 2:
        raise InvalidInput("an audit needs at least two samples")
    times = np.arange(len(rhos), dtype=float) if times is None else np.asarray(times, dtype=float)
    if times.size != len(rhos):
        raise InvalidInput("times and states differ in length")
    FQ, FC, A = [], [], []
    for rho in rhos:
        rho = density_matrix(rho)
        pops = np.clip(np.real(np.diag(rho)), 0.0, None)
        FC.append(free_energy(pops / pops.sum(), spec))
        FQ.append(quantum_free_energy(rho, spec))
        A.append(asymmetry(rho))
    FQ, FC, A = np.array(FQ), np.array(FC), np.array(A)
    mono = bool(np.all(np.diff(FQ) <= MONO_SLACK))
    return FreeEnergyAudit(times, FC, FQ, A, mono, detect_backflow(FC))


def partial_thermalization_time(p01: float, betaE: float, rate: float = 1.0) -> float:
    """Time for which two-level thermalisation at ``rate`` yields P_{0|1} = p01."""
    if rate <= 0:
        raise InvalidInput("rate must be positive")
    if p01 < 0:
        raise InvalidInput("transition probability must be non-negative")
    thr = detailed_balance_threshold(betaE)
    if p01 > thr:
        raise MemoryRequired(f"P01 = {p01} exceeds the memoryless threshold {thr}")
    if p01 == thr:
        return math.inf
    return -math.log1p(-p01 / thr) / rate


def thermalization_generator(betaE: float, rate: float = 1.0) -> np.ndarray:
    """Detailed-balanced two-level rate matrix relaxing to the Gibbs state of (0, E)."""
    g = detailed_balance_threshold(betaE)
    # columns: out of |0> at rate R (1 - g), out of |1> at rate R g
    return rate * np.array([[-(1 - g), g], [1 - g, -g]])
