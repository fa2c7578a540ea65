"""Decision procedures for classical embeddability of stochastic matrices."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import InvalidInput, UnsupportedDimension
from .linalg import T_TRUNC, propagate_classical, stochastic_matrix

SLACK = 1e-12


class Status(str, enum.Enum):
    EMBEDDABLE = "Embeddable"
    NOT_EMBEDDABLE = "NotEmbeddable"
    NECESSARY_ONLY_PASS = "NecessaryOnly-Pass"
    UNKNOWN = "Unknown"


@dataclass
class EmbedVerdict:
    status: Status
    # schedule of (generator, duration); math.inf marks a limit (t_f = inf) stage
    witness: list | None = None
    reason: dict = field(default_factory=dict)

    @property
    def embeddable(self) -> bool:
        return self.status is Status.EMBEDDABLE

    def reproduce(self, t_trunc: float = T_TRUNC) -> np.ndarray:
        if self.witness is None:
            raise ValueError("verdict carries no witness")
        d = np.asarray(self.witness[0][0]).shape[0]
        return propagate_classical(self.witness, t_trunc=t_trunc, d=d)


def check_goodman(P) -> EmbedVerdict:
    """Necessary conditions prod_i P_ii >= det P >= 0."""
    P = stochastic_matrix(P)
    diag_prod = float(np.prod(np.diag(P)))
    det = float(np.linalg.det(P))
    reason = {"test": "goodman", "det": det, "diag_product": diag_prod}
    if det < -SLACK:
        reason["failed"] = "det < 0"
        return EmbedVerdict(Status.NOT_EMBEDDABLE, None, reason)
    if diag_prod < det - SLACK:
        reason["failed"] = "diag_product < det"
        return EmbedVerdict(Status.NOT_EMBEDDABLE, None, reason)
    return EmbedVerdict(Status.NECESSARY_ONLY_PASS, None, reason)


def check_embeddable_2x2(P) -> EmbedVerdict:
    """Exact test for d = 2: embeddable iff det P >= 0, with a generator witness."""
    P = stochastic_matrix(P)
    if P.shape != (2, 2):
        raise InvalidInput("check_embeddable_2x2 needs a 2x2 matrix")
    mu = float(np.linalg.det(P))
    reason = {"test": "det-2x2", "det": mu}
    if mu < -SLACK:
        reason["failed"] = "det < 0"
        return EmbedVerdict(Status.NOT_EMBEDDABLE, None, reason)
    eye = np.eye(2)
    if mu >= 1.0 - SLACK:
        # det = 1 forces P = identity
        return EmbedVerdict(Status.EMBEDDABLE, [(np.zeros((2, 2)), 1.0)], reason)
    if mu <= SLACK:
        # rank one and idempotent: exp((P - I) t) -> P as t -> inf
        reason["limit"] = True
        return EmbedVerdict(Status.EMBEDDABLE, [(P - eye, math.inf)], reason)
    L = math.log(mu) / (mu - 1.0) * (P - eye)
    return EmbedVerdict(Status.EMBEDDABLE, [(L, 1.0)], reason)


def detailed_balance_threshold(betaE: float) -> float:
    """Largest de-excitation probability P_{0|1} reachable without memory."""
    if not math.isfinite(betaE):
        raise InvalidInput("betaE must be finite")
    # e^x / (1 + e^x) written to avoid overflow
    return 1.0 / (1.0 + math.exp(-betaE))


def detailed_balanced_matrix(p01: float, betaE: float) -> np.ndarray:
    """Two-level process with P_{1|0} = P_{0|1} e^{-betaE}."""
    p10 = p01 * math.exp(-betaE)
    return np.array([[1.0 - p10, p01], [p10, 1.0 - p01]])


def circulant3(a: float, b: float) -> np.ndarray:
    """3x3 circulant stochastic matrix with first row (1 - a - b, a, b)."""
    _check_simplex(a, b)
    c = max(1.0 - a - b, 0.0)
    return np.array([[c, a, b], [b, c, a], [a, b, c]])


def circulant_params(P) -> tuple[float, float]:
    """Inverse of :func:`circulant3`: read (a, b) off the first row."""
    P = np.asarray(P)
    if not np.allclose(P, circulant3(P[0, 1], P[0, 2]), atol=1e-12):
        raise InvalidInput("matrix is not a stochastic circulant")
    return float(P[0, 1]), float(P[0, 2])


def _check_simplex(a, b):
    if not (a >= -SLACK and b >= -SLACK and a + b <= 1.0 + SLACK):
        raise InvalidInput(f"(a, b) = ({a}, {b}) is outside the simplex a, b >= 0, a + b <= 1")


def circulant3_eigenvalues(a: float, b: float) -> list[complex]:
    w = cmath.exp(2j * math.pi / 3)
    c = 1.0 - a - b
    return [c + a * w**k + b * w ** (2 * k) for k in range(3)]


def _angle(lam: complex) -> float:
    theta = cmath.phase(lam)
    # ties at -pi resolved to +pi
    if theta <= -math.pi + 1e-15:
        theta = math.pi
    return theta


def check_circulant3(a: float, b: float) -> EmbedVerdict:
    """Embeddability of a 3x3 circulant: r_k <= exp(-theta_k tan(pi/3)) for all k."""
    _check_simplex(a, b)
    lams = circulant3_eigenvalues(a, b)
    tan = math.tan(math.pi / 3)
    bounds = []
    ok = True
    for lam in lams:
        r = abs(lam)
        theta = _angle(lam) if r > 0 else 0.0
        bound = math.exp(-theta * tan)
        bounds.append({"r": r, "theta": theta, "bound": bound})
        if r > bound + SLACK:
            ok = False
    reason = {"test": "circulant3", "eigenvalues": bounds}
    if not ok:
        reason["failed"] = "r_k > exp(-theta_k tan(pi/3))"
        return EmbedVerdict(Status.NOT_EMBEDDABLE, None, reason)
    return EmbedVerdict(Status.EMBEDDABLE, _circulant_witness(lams[1]), reason)


def _circulant_generator(alpha: float, beta: float) -> np.ndarray:
    return np.array(
        [
            [-(alpha + beta), alpha, beta],
            [beta, -(alpha + beta), alpha],
            [alpha, beta, -(alpha + beta)],
        ]
    )


def _circulant_witness(lam1: complex) -> list:
    # circulant generator (-(al+be), al, be) has eigenvalue
    # -3(al+be)/2 + i sqrt(3)(al-be)/2 on the same Fourier mode as lam1
    if abs(lam1) < 1e-300:
        return [(_circulant_generator(1 / 3, 1 / 3), math.inf)]
    theta = _angle(lam1)
    mu = complex(math.log(abs(lam1)), theta)
    alpha = -mu.real / 3 + mu.imag / math.sqrt(3)
    beta = -mu.real / 3 - mu.imag / math.sqrt(3)
    alpha, beta = max(alpha, 0.0), max(beta, 0.0)
    return [(_circulant_generator(alpha, beta), 1.0)]


def chain_links(P) -> np.ndarray:
    """Link lengths sqrt(P_i1 P_i2) built from the first two columns."""
    P = np.asarray(P)
    return np.sqrt(P[:, 0] * P[:, 1])


def check_unistochastic_circulant3(a: float, b: float, tol: float = SLACK) -> bool:
    """Chain-links test: the three links must close into a triangle."""
    l1, l2, l3 = chain_links(circulant3(a, b))
    return bool(abs(l1 - l2) <= l3 + tol and l3 <= l1 + l2 + tol)


@dataclass
class UnistochasticSearch:
    found: bool
    residual: float
    unitary: np.ndarray | None
    restarts: int


def _hermitian_from_params(x, d):
    H = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    n_off = len(iu[0])
    H[np.diag_indices(d)] = x[:d]
    H[iu] = x[d : d + n_off] + 1j * x[d + n_off :]
    H = H + np.triu(H, 1).conj().T
    return H


def check_unistochastic_search(
    P, restarts: int = 20, seed: int = 0, tol: float = 1e-10
) -> UnistochasticSearch:
    """Numerically search for U with |U_ij|^2 = P_ij.

    Minimises sum_ij (|U_ij|^2 - P_ij)^2 over U = exp(iH). A negative answer
    is best effort; ``residual`` reports the best value reached.
    """
    P = stochastic_matrix(P)
    d = P.shape[0]
    if d > 4:
        raise UnsupportedDimension("unitary search is limited to d <= 4")
    rng = np.random.default_rng(seed)

    def unitary(x):
        w, V = np.linalg.eigh(_hermitian_from_params(x, d))
        return (V * np.exp(1j * w)) @ V.conj().T

    def residuals(x):
        return (np.abs(unitary(x)) ** 2 - P).ravel()

    best = (math.inf, None)
    for k in range(restarts):
        x0 = rng.uniform(-math.pi, math.pi, d * d)
        sol = least_squares(residuals, x0, method="lm", xtol=1e-12, ftol=1e-14, gtol=1e-12)
        res = float(np.sum(sol.fun**2))
        if res < best[0]:
            best = (res, sol.x)
        if res < tol:
            return UnistochasticSearch(True, res, unitary(sol.x), k + 1)
    return UnistochasticSearch(False, best[0], None, restarts)
