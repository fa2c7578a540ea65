"""Optional PNG renderings of the CLI tables (Agg backend, no display needed)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CLASS_COLORS = {
    "ClassicalEmbeddable": "#4daf4a",
    "QuantumViaPermutedClassical": "#377eb8",
    "QuantumViaUnistochastic": "#ff7f00",
    "Unknown": "#999999",
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def region_scan(rows, path):
    """Scatter of (a, b) coloured by classification; points outside the simplex are skipped."""
    fig, ax = plt.subplots(figsize=(5, 5))
    n = max(int(round(np.sqrt(len(rows)))), 1)
    size = max(20000 / (n * n), 0.5)
    for label, color in CLASS_COLORS.items():
        pts = np.array([(a, b) for a, b, c in rows if c == label]).reshape(-1, 2)
        if len(pts):
            ax.scatter(pts[:, 0], pts[:, 1], s=size, c=color, marker="s", lw=0, label=label)
    ax.set_xlabel("a")
    ax.set_ylabel("b")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.legend(fontsize=7, loc="upper right", markerscale=4)
    _save(fig, path)


def cost_table(rows, path):
    """Time cost against memory size on log axes; rows are (m, lo, hi, bound, quantum)."""
    m = np.array([r[0] for r in rows], dtype=float)
    lo = np.array([np.nan if r[1] is None else r[1] for r in rows], dtype=float)
    q = np.array([r[4] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(m, lo, "o-", ms=3, label="classical (lower end)")
    ax.loglog(m, q, "s--", ms=3, label="quantum, no memory")
    ax.set_xlabel("memory states m")
    ax.set_ylabel("time steps")
    ax.legend()
    _save(fig, path)


def qubit_path(xs, zs, circle, path):
    """Trajectory in the x-z plane with the starting extremal circle."""
    fig, ax = plt.subplots(figsize=(5, 5))
    th = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.sin(th), np.cos(th), color="0.8", lw=0.8)
    if circle is not None:
        c, r = circle
        ax.plot(r * np.sin(th), c + r * np.cos(th), "--", color="C1", lw=1)
    ax.plot(xs, zs, ".-", ms=2, color="C0")
    ax.set_xlabel("x")
    ax.set_ylabel("z")
    ax.set_aspect("equal")
    _save(fig, path)


def free_energy(times, F, FQ, A, beta, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(times, FQ, label="F_Q")
    ax.plot(times, F, label="F")
    ax.plot(times, np.asarray(A) / beta, label="A / beta")
    ax.set_xlabel("t")
    ax.legend()
    _save(fig, path)
