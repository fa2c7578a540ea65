"""Qubit channels with a thermal fixed point diag((1 + zeta) / 2, (1 - zeta) / 2).

States are handled through their Bloch vectors. Rotations about z leave the
fixed point alone, so most routines rotate into the x >= 0, y = 0 half-plane
first and rotate back at the end.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFixedPoint, InvalidInput, NoChannel
from .linalg import KrausChannel, Lindbladian, expm, unvec, vec

MONO_SLACK = 1e-12
DENOM_TOL = 1e-10
NUDGE = 1e-8

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class BlochState:
    x: float
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        vals = (self.x, self.y, self.z)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInput("Bloch coordinates must be finite")
        if self.x**2 + self.y**2 + self.z**2 > 1 + 1e-10:
            raise InvalidInput("Bloch vector lies outside the unit ball")

    @classmethod
    def from_density(cls, rho) -> "BlochState":
        rho = np.asarray(rho)
        return cls(
            float(2 * rho[0, 1].real),
            float(-2 * rho[0, 1].imag),
            float((rho[0, 0] - rho[1, 1]).real),
        )

    def density(self) -> np.ndarray:
        return 0.5 * (np.eye(2) + self.x * PAULI_X + self.y * PAULI_Y + self.z * PAULI_Z)

    @property
    def azimuth(self) -> float:
        return math.atan2(self.y, self.x)

    @property
    def transverse(self) -> float:
        return math.hypot(self.x, self.y)

    def reduced(self) -> "BlochState":
        """Rotate about z into the x >= 0, y = 0 half-plane."""
        return BlochState(self.transverse, 0.0, self.z)

    def rotated(self, phi: float) -> "BlochState":
        c, s = math.cos(phi), math.sin(phi)
        return BlochState(c * self.x - s * self.y, s * self.x + c * self.y, self.z)


def z_rotation(phi: float) -> np.ndarray:
    """Unitary rotating Bloch vectors by phi about the z axis."""
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


def thermal_state(zeta: float) -> np.ndarray:
    _check_zeta(zeta)
    return np.diag([(1 + zeta) / 2, (1 - zeta) / 2]).astype(complex)


def zeta_from_betaE(betaE: float) -> float:
    """Bloch z of the Gibbs state of levels (0, E)."""
    return math.tanh(betaE / 2)


def _check_zeta(zeta: float):
    if not math.isfinite(zeta) or abs(zeta) > 1:
        raise InvalidInput("zeta must lie in [-1, 1]")


def _full_rank(zeta: float):
    _check_zeta(zeta)
    if abs(zeta) >= 1.0:
        raise DegenerateFixedPoint("fixed point with |zeta| = 1 is not full rank")


def qubit_monotones(rho: BlochState, zeta: float) -> tuple[float, float, float]:
    """(R_plus, R_minus, delta) with delta = sqrt((z - zeta)^2 + x^2 (1 - zeta^2))."""
    _check_zeta(zeta)
    x, z = rho.transverse, rho.z
    delta = math.sqrt((z - zeta) ** 2 + x * x * (1 - zeta * zeta))
    return delta + zeta * z, delta - zeta * z, delta


def qubit_accessible(rho: BlochState, rho_prime: BlochState, zeta: float, slack: float = MONO_SLACK) -> bool:
    """Can a channel fixing the thermal state take rho to rho_prime?"""
    rp, rm, _ = qubit_monotones(rho, zeta)
    rp2, rm2, _ = qubit_monotones(rho_prime, zeta)
    return rp >= rp2 - slack and rm >= rm2 - slack


@dataclass(frozen=True)
class Circle:
    """Circle in the x-z plane centred on the z axis."""

    center_z: float
    radius: float

    def x_at(self, z: float) -> float | None:
        """Non-negative x of the circle at height z, or None when z is out of range."""
        arg = self.radius**2 - (z - self.center_z) ** 2
        if arg < 0:
            return None
        return math.sqrt(arg)

    def radial_deviation(self, x: float, z: float) -> float:
        return abs(math.hypot(x, z - self.center_z) - self.radius)

    @property
    def top(self) -> float:
        return self.center_z + self.radius

    @property
    def bottom(self) -> float:
        return self.center_z - self.radius


def extremal_circles(rho: BlochState, zeta: float) -> tuple[Circle, Circle]:
    """Level sets of R_plus (circle 0) and R_minus (circle 1) through rho."""
    _full_rank(zeta)
    rp, rm, _ = qubit_monotones(rho, zeta)
    z2 = zeta * zeta
    R0 = max((rp - z2) / (1 - z2), 0.0)
    R1 = max((rm + z2) / (1 - z2), 0.0)
    return Circle(zeta * (1 - R0), R0), Circle(zeta * (1 + R1), R1)


def _pure_from_bloch(nx: float, nz: float):
    """Real unit vectors psi and psi_perp for the pure state with Bloch vector (nx, 0, nz)."""
    theta = math.atan2(nx, nz)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([c, s]), np.array([-s, c])


def _frame(nx, nz):
    psi, perp = _pure_from_bloch(nx, nz)
    # U = |0><psi| + |1><psi_perp|
    return np.vstack([psi, perp]).astype(complex)


def _circle_projector(state: BlochState, circle_index: int, R: float, zeta: float):
    """Bloch vector of the pure state psi in rho = R psi + (1 - R) gamma (index 0)
    or rho = (1 + R) gamma - R psi (index 1)."""
    if circle_index == 0:
        nx, nz = state.x / R, (state.z - (1 - R) * zeta) / R
    else:
        nx, nz = -state.x / R, ((1 + R) * zeta - state.z) / R
    n = math.hypot(nx, nz)
    return nx / n, nz / n


def _rotated_fixed_point(U, zeta):
    G = U @ thermal_state(zeta) @ U.conj().T
    a = G[0, 0].real
    eps = G[0, 1].real / math.sqrt(a * (1 - a))
    return a, eps


def _core_coefficients(a, eps, a2, eps2):
    ratio = a / a2
    den = 1 - ratio * (1 - eps * eps)
    if min(abs(a2), abs(1 - a), abs(den)) < DENOM_TOL:
        raise ZeroDivisionError
    sq = lambda v: math.sqrt(max(v, 0.0))
    alpha = sq(a * (1 - a2) / (a2 * (1 - a))) * eps * eps2 / den
    beta = sq((a2 - a) * (1 - a2) / ((1 - a) * a2)) * eps2 / den
    gamma = sq(((1 - eps2 * eps2) - ratio * (1 - eps * eps)) / den) * sq((1 - a2) / (1 - a))
    omega = sq((a2 - a) / (1 - a))
    return alpha, beta, gamma, omega


def _boundary_channel(rho: BlochState, target: BlochState, circle_index: int, R: float, zeta: float):
    """Three Kraus operators moving rho to a target on the same circle."""
    U = _frame(*_circle_projector(rho, circle_index, R, zeta))
    U2 = _frame(*_circle_projector(target, circle_index, R, zeta))
    a, eps = _rotated_fixed_point(U, zeta)
    a2, eps2 = _rotated_fixed_point(U2, zeta)
    al, be, ga, om = _core_coefficients(a, eps, a2, eps2)
    A = np.diag([1.0, al])
    B = np.array([[0.0, om], [0.0, be]])
    C = np.diag([0.0, ga])
    W = U2.conj().T
    return [W @ K @ U for K in (A, B, C)], (al, be, ga, om)


@dataclass
class QubitChannel:
    """Kraus channel together with its diagnostic residuals."""

    channel: KrausChannel
    completeness: float
    fixed_point_residual: float
    target_residual: float
    coefficients: tuple = ()


def _residuals(ops, rho: BlochState, target: BlochState, zeta: float):
    ch = KrausChannel(ops)
    g = thermal_state(zeta)
    fp = float(np.abs(ch(g) - g).max())
    tr = float(np.abs(ch(rho.density()) - target.density()).max())
    return ch, ch.completeness_error(), fp, tr


def _reduced_channel(rho: BlochState, target: BlochState, zeta: float):
    """Kraus operators for reduced (x >= 0, y = 0) states."""
    _, _, delta = qubit_monotones(rho, zeta)
    if delta < 1e-14:
        return [np.eye(2, dtype=complex)], ()
    c0, c1 = extremal_circles(rho, zeta)
    zt = target.z
    widths = [c.x_at(zt) for c in (c0, c1)]
    if any(w is None for w in widths):
        raise NoChannel("target height lies outside the accessible lens")
    k = int(np.argmin(widths))
    w = widths[k]
    circle = (c0, c1)[k]
    if target.x > w + 1e-9:
        raise NoChannel("target lies outside the accessible lens")
    # boundary point at the target height; interior targets mix it with its mirror image
    boundary = BlochState(w, 0.0, zt)
    if _same(rho, boundary):
        ops, coeffs = [np.eye(2, dtype=complex)], ()
    else:
        ops, coeffs = _boundary_with_retry(rho, boundary, k, circle, zeta)
    if w > 0 and target.x < w - 1e-15:
        t = 0.5 * (1 + min(target.x, w) / w)
        ops = [math.sqrt(t) * K for K in ops] + [math.sqrt(1 - t) * (PAULI_Z @ K) for K in ops]
    return ops, coeffs


def _same(s1: BlochState, s2: BlochState, tol=1e-13) -> bool:
    return abs(s1.x - s2.x) < tol and abs(s1.z - s2.z) < tol


def _boundary_with_retry(rho, boundary, k, circle, zeta):
    try:
        return _boundary_channel(rho, boundary, k, circle.radius, zeta)
    except ZeroDivisionError:
        pass
    # nudge the target along the circle, back towards the start
    sign = -1.0 if boundary.z > rho.z else 1.0
    z = boundary.z + sign * NUDGE
    x = circle.x_at(z) or 0.0
    return _boundary_channel(rho, BlochState(x, 0.0, z), k, circle.radius, zeta)


def alberti_uhlmann_channel(rho: BlochState, rho_prime: BlochState, zeta: float) -> QubitChannel:
    """Channel fixing the thermal state and taking rho to rho_prime."""
    _full_rank(zeta)
    if not qubit_accessible(rho, rho_prime, zeta):
        raise NoChannel("monotones forbid the transition")
    r1, r2 = rho.reduced(), rho_prime.reduced()
    ops, coeffs = _reduced_channel(r1, r2, zeta)
    # undo the reductions: rotate the input into the half-plane, the output out of it
    Rin = z_rotation(-rho.azimuth)
    Rout = z_rotation(rho_prime.azimuth)
    ops = [Rout @ K @ Rin for K in ops]
    ch, comp, fp, tr = _residuals(ops, rho, rho_prime, zeta)
    return QubitChannel(ch, comp, fp, tr, coeffs)


class StopReason(str, enum.Enum):
    MONOTONE_VIOLATED = "MonotoneViolated"
    TARGET_REACHED = "TargetReached"
    MAX_STEPS = "MaxSteps"


@dataclass
class PathTrajectory:
    delta: float
    zeta: float
    states: list = field(default_factory=list)  # BlochState, starting point first
    densities: list = field(default_factory=list)
    channels: list = field(default_factory=list)  # channels[i] moved states[i] to states[i + 1]
    stop_reason: StopReason = StopReason.MAX_STEPS
    circle: Circle | None = None  # extremal circle of the starting point

    @property
    def steps(self) -> int:
        return len(self.channels)

    def radial_deviations(self) -> np.ndarray:
        if self.circle is None:
            return np.zeros(len(self.states))
        return np.array([self.circle.radial_deviation(s.transverse, s.z) for s in self.states])

    def monotones(self) -> np.ndarray:
        return np.array([qubit_monotones(s, self.zeta)[:2] for s in self.states]).reshape(-1, 2)


def extremal_path_evolve(
    rho0: BlochState,
    zeta: float,
    delta: float,
    max_steps: int = 10_000,
    z_target: float | None = None,
) -> PathTrajectory:
    """Follow an extremal circle with steps exp(E_i - I) of unit duration.

    delta > 0 climbs circle 0, delta < 0 descends circle 1. Each step aims at
    the point of the current circle at height z + delta; the evolution stops
    when that point no longer exists (or is forbidden by the monotones), when
    ``z_target`` is passed, or after ``max_steps``.
    """
    _full_rank(zeta)
    if delta == 0 or not math.isfinite(delta):
        raise InvalidInput("delta must be a non-zero finite number")
    phi = rho0.azimuth
    back = z_rotation(phi)
    cur = rho0.reduced()
    k = 0 if delta > 0 else 1
    traj = PathTrajectory(delta, zeta)
    traj.states.append(rho0)
    traj.densities.append(rho0.density())
    if qubit_monotones(cur, zeta)[2] < 1e-14:
        traj.stop_reason = StopReason.MONOTONE_VIOLATED
        return traj
    traj.circle = extremal_circles(cur, zeta)[k]
    traj.stop_reason = StopReason.MAX_STEPS
    for _ in range(max_steps):
        if z_target is not None and (cur.z - z_target) * math.copysign(1, delta) >= 0:
            traj.stop_reason = StopReason.TARGET_REACHED
            break
        circle = extremal_circles(cur, zeta)[k]
        zn = cur.z + delta
        xn = circle.x_at(zn)
        if xn is None:
            traj.stop_reason = StopReason.MONOTONE_VIOLATED
            break
        nxt = BlochState(xn, 0.0, zn)
        if not qubit_accessible(cur, nxt, zeta):
            traj.stop_reason = StopReason.MONOTONE_VIOLATED
            break
        ops, _ = _reduced_channel(cur, nxt, zeta)
        ch = KrausChannel(ops)
        S = expm(Lindbladian.from_channel(ch).superoperator())
        rho = unvec(S @ vec(cur.density()), 2)
        rho = (rho + rho.conj().T) / 2
        st = BlochState.from_density(rho)
        # numerical y is ~1e-17; keep the evolution in the half-plane
        cur = BlochState(math.hypot(st.x, st.y), 0.0, st.z)
        rot = KrausChannel([back @ K @ back.conj().T for K in ops])
        traj.channels.append(rot)
        out = cur.rotated(phi)
        traj.states.append(out)
        traj.densities.append(out.density())
    return traj


def delta_for_steps(rho: BlochState, zeta: float, steps: int, descend: bool = False) -> float:
    """Signed step size splitting the run to the end of the extremal circle into equal parts."""
    c0, c1 = extremal_circles(rho.reduced(), zeta)
    if descend:
        return (c1.bottom - rho.z) / steps
    return (c0.top - rho.z) / steps


def exotic_thermalizer(gamma0: float) -> Lindbladian:
    """Lindbladian with H = 0 whose CP part prepares coherent states from populations.

    The CP part is rho -> (rho_00 / g0)(gamma - g1 |g><g|) + rho_11 |g><g|
    with |g> = sqrt(g0)|0> + sqrt(g1)|1>. It is positive only for g0 >= 1/2.
    """
    if not (0.0 < gamma0 < 1.0):
        raise InvalidInput("gamma0 must lie in (0, 1)")
    g1 = 1.0 - gamma0
    if gamma0 < g1 - 1e-15:
        raise InvalidInput("map is not completely positive for gamma0 < 1/2")
    ket = np.array([math.sqrt(gamma0), math.sqrt(g1)])
    proj = np.outer(ket, ket)
    sigma0 = (np.diag([gamma0, g1]) - g1 * proj) / gamma0
    ops = []
    for col, sigma in ((0, sigma0), (1, proj)):
        w, V = np.linalg.eigh(sigma)
        for lam, v in zip(w, V.T):
            if lam > 1e-15:
                K = np.zeros((2, 2))
                K[:, col] = math.sqrt(lam) * v
                ops.append(K)
    return Lindbladian(np.zeros((2, 2)), tuple(ops))
