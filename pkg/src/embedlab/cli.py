"""Command-line entry point: ``embedlab <subcommand> ...``.

Exit status is 0 on success, 2 when the computation succeeded but the answer
is negative (for instance a matrix that is not embeddable), and 1 on errors,
which are reported as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io
from .accessibility import (
    majorisation_region,
    memory_region_extent,
    qubit_memory_classical_interval,
    qubit_memoryless_classical_interval,
)
from .embeddability import (
    Status,
    check_circulant3,
    check_embeddable_2x2,
    check_goodman,
    check_unistochastic_search,
    circulant_params,
)
from .errors import EmbedlabError, InvalidInput, UnsupportedDimension
from .linalg import prob_vector, stochastic_matrix
from .qubit import BlochState, delta_for_steps, extremal_path_evolve, qubit_monotones
from .quantum_embed import (
    circulant_realization,
    classify_circulant_point,
    decompose_2x2,
    identity_realization,
    unistochastic_channel,
)
from .spacetime import (
    function_map,
    function_tradeoff_table,
    named_tradeoff_table,
    quantum_realization_of_function,
    typicality_sample,
)
from .thermo import EnergySpec, audit_trajectory

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("EMBEDLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise InvalidInput(f"EMBEDLAB_SEED={env!r} is not an integer") from None


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, obj):
    _emit(args, io.dumps(obj, indent=2, sort_keys=True) + "\n")


def _verdict_json(v) -> dict:
    witness = None
    if v.witness is not None:
        witness = [
            {"generator": np.asarray(L), "duration": io.finite_or_none(float(t)), "limit": math.isinf(t)}
            for L, t in v.witness
        ]
    return {"status": v.status.value, "reason": _clean(v.reason), "witness": witness}


def _clean(obj):
    """Replace non-finite floats so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _is_circulant(P) -> bool:
    try:
        circulant_params(P)
    except (InvalidInput, ValueError):
        return False
    return True


def cmd_embed_check(args) -> int:
    if args.circulant is not None:
        v = check_circulant3(*args.circulant)
    else:
        if not args.matrix:
            raise InvalidInput("embed-check needs --matrix or --circulant")
        P = stochastic_matrix(io.load_matrix(args.matrix))
        d = P.shape[0]
        if np.allclose(P, np.eye(d), rtol=0, atol=1e-15):
            v = check_goodman(P)
            v.status, v.witness = Status.EMBEDDABLE, [(np.zeros((d, d)), 1.0)]
            v.reason["identity"] = True
        elif d == 2:
            v = check_embeddable_2x2(P)
        elif d == 3 and _is_circulant(P):
            v = check_circulant3(*circulant_params(P))
        else:
            v = check_goodman(P)
    _emit_json(args, _verdict_json(v))
    return EXIT_NEGATIVE if v.status is Status.NOT_EMBEDDABLE else EXIT_OK


def _realization_json(r) -> dict:
    stages = []
    for s in r.stages:
        L = s.lindbladian
        stages.append(
            {
                "kind": s.kind,
                "duration": s.duration,
                "truncated": s.truncated,
                "hamiltonian": L.hamiltonian,
                "jump_operators": list(L.cp_part),
                "generator": s.generator,
            }
        )
    return {
        "d": r.dim,
        "target": r.target,
        "achieved": r.extract(),
        "achieved_error": r.achieved_error,
        "stages": stages,
    }


def _find_realization(P, seed):
    d = P.shape[0]
    if np.allclose(P, np.eye(d), rtol=0, atol=1e-15):
        return identity_realization(d)
    if d == 2:
        return decompose_2x2(P)
    if np.all((P == 0) | (P == 1)):
        return quantum_realization_of_function(np.argmax(P, axis=0))
    if d == 3 and _is_circulant(P):
        return circulant_realization(*circulant_params(P), seed=seed)
    if d <= 4:
        search = check_unistochastic_search(P, seed=seed)
        if search.found:
            return unistochastic_channel(search.unitary)
    return None


def cmd_qembed(args) -> int:
    P = stochastic_matrix(io.load_matrix(args.matrix))
    r = _find_realization(P, _seed(args))
    if r is None:
        _emit_json(args, {"status": "NoRealizationFound", "d": P.shape[0]})
        return EXIT_NEGATIVE
    out = _realization_json(r)
    out["status"] = "Realized"
    _emit_json(args, out)
    return EXIT_OK


def grid_points(n: int):
    """Grid over the unit square, a-major order; spacing 1/(n - 1)."""
    if n < 2:
        raise InvalidInput("grid needs at least 2 points per side")
    ticks = np.linspace(0.0, 1.0, n)
    return [(float(a), float(b)) for a in ticks for b in ticks]


def classify_or_outside(point) -> str:
    a, b = point
    if a + b > 1.0 + 1e-12:
        return "Outside"
    return classify_circulant_point(a, b).value


def region_scan(n: int, threads: int = 1) -> list[tuple[float, float, str]]:
    pts = grid_points(n)
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            labels = list(pool.map(classify_or_outside, pts, chunksize=max(len(pts) // (8 * threads), 1)))
    else:
        labels = [classify_or_outside(p) for p in pts]
    return [(a, b, c) for (a, b), c in zip(pts, labels)]


def cmd_region_scan(args) -> int:
    threads = args.threads or os.cpu_count() or 1
    rows = region_scan(args.grid, threads)
    _emit(args, io.csv_text(["a", "b", "classification"], rows))
    if args.plot:
        from . import plotting

        plotting.region_scan([r for r in rows if r[2] != "Outside"], args.plot)
    return EXIT_OK


def _parse_int_list(text: str, stop: int | None = None) -> list[int]:
    """Comma-separated integers; a trailing ``...`` continues the ratio of the last two up to ``stop``."""
    parts = [v.strip() for v in text.split(",") if v.strip()]
    ellipsis = bool(parts) and parts[-1] == "..."
    if ellipsis:
        parts = parts[:-1]
    try:
        vals = [int(v, 0) for v in parts]
    except ValueError:
        raise InvalidInput(f"cannot parse integer list {text!r}") from None
    if ellipsis:
        if len(vals) < 2 or stop is None or vals[-2] <= 0 or vals[-1] % vals[-2]:
            raise InvalidInput("'...' needs two leading terms with an integer ratio and a known end")
        ratio = vals[-1] // vals[-2]
        if ratio < 2:
            raise InvalidInput("'...' needs a ratio of at least 2")
        while vals[-1] * ratio <= stop:
            vals.append(vals[-1] * ratio)
    return vals


def _function_from_file(path) -> np.ndarray:
    obj = io.load_json(path)
    if isinstance(obj, list):
        return function_map(obj)
    P = stochastic_matrix(io.matrix_from_json(obj))
    if not np.all((P == 0) | (P == 1)):
        raise InvalidInput("cost-table needs a {0,1}-valued stochastic matrix")
    return function_map(np.argmax(P, axis=0))


def cmd_cost_table(args) -> int:
    if args.function in ("f1", "f2"):
        if args.bits is None:
            raise InvalidInput("--bits is required for the named functions")
        mem = _parse_int_list(args.mem, 1 << args.bits) if args.mem else [1 << k for k in range(args.bits + 1)]
        table = named_tradeoff_table(args.function, args.bits, mem)
    else:
        f = _function_from_file(args.function)
        mem = _parse_int_list(args.mem, f.size) if args.mem else list(range(f.size + 1))
        table = function_tradeoff_table(f, mem)
    header = [
        "m",
        "classical_lo",
        "classical_hi",
        "lower_bound",
        "lower_bound_exact",
        "quantum_cost",
        "quantum_stages",
        "quantum_memory",
    ]
    rows = []
    for r in table:
        c = r.classical
        num, den = r.lower_bound_exact
        exact = "inf" if den <= 0 else repr(num / den)
        lo = "inf" if c.infinite else c.lo
        hi = "inf" if c.infinite else c.hi
        lb = "inf" if c.infinite else c.lower_bound
        rows.append([r.m, lo, hi, lb, exact, r.quantum_cost, r.quantum_stages, r.quantum_memory])
    _emit(args, io.csv_text(header, rows))
    if args.plot:
        from . import plotting

        plotting.cost_table(
            [(r.m, r.classical.lo, r.classical.hi, r.classical.lower_bound, r.quantum_cost) for r in table],
            args.plot,
        )
    return EXIT_OK


def cmd_typicality(args) -> int:
    t = typicality_sample(args.d, args.trials, seed=_seed(args))
    out = {
        "d": t.d,
        "trials": t.trials,
        "seed": _seed(args),
        "mean_image_size": t.mean_img,
        "expected_image_size": t.expected_img,
        "sigma_image_size": t.sigma_img,
        "z_image_size": t.img_z,
        "mean_fixed_points": t.mean_fix,
        "expected_fixed_points": t.expected_fix,
        "sigma_fixed_points": t.sigma_fix,
        "z_fixed_points": t.fix_z,
        "within_3_sigma": abs(t.img_z) <= 3 and abs(t.fix_z) <= 3,
    }
    _emit_json(args, out)
    return EXIT_OK


def cmd_access_region(args) -> int:
    p = prob_vector(io.load_vector(args.p))
    gamma = prob_vector(io.load_vector(args.gamma))
    if p.size != gamma.size:
        raise InvalidInput("p and gamma differ in dimension")
    if np.any(gamma <= 0):
        raise InvalidInput("fixed point must be full rank")
    d = p.size
    out = {"d": d, "p": p, "gamma": gamma}
    uniform = np.allclose(gamma, 1.0 / d, rtol=0, atol=1e-12)
    if args.closed_form:
        out["method"] = "closed-form"
        if d == 2:
            betaE = math.log(gamma[0] / gamma[1])
            out["betaE"] = betaE
            out["memoryless_ground_interval"] = list(qubit_memoryless_classical_interval(p[0], betaE))
            out["memory_ground_interval"] = list(qubit_memory_classical_interval(p[0], betaE))
        elif uniform:
            out["region"] = majorisation_region(p)
        else:
            raise UnsupportedDimension("closed forms cover d = 2 or a uniform fixed point")
    else:
        out["method"] = "lp"
        extent = memory_region_extent(p, gamma)
        out["coordinate_extent"] = [list(e) for e in extent]
        if d == 2:
            out["memory_ground_interval"] = list(extent[0])
        if uniform:
            out["region"] = majorisation_region(p)
    _emit_json(args, out)
    return EXIT_OK


def cmd_qubit_path(args) -> int:
    rho = BlochState(args.x, 0.0, args.z)
    delta = args.delta
    if delta is None:
        delta = delta_for_steps(rho, args.zeta, args.steps, descend=args.descend)
        if delta == 0:
            raise InvalidInput("start state sits at the end of its extremal circle")
    traj = extremal_path_evolve(rho, args.zeta, delta, max_steps=args.max_steps)
    dev = traj.radial_deviations()
    rows = []
    for k, s in enumerate(traj.states):
        rp, rm, _ = qubit_monotones(s, args.zeta)
        rows.append([k, s.x, s.z, rp, rm, dev[k]])
    _emit(args, io.csv_text(["step", "x", "z", "R_plus", "R_minus", "radial_deviation"], rows))
    if args.plot:
        from . import plotting

        c = traj.circle
        plotting.qubit_path(
            [s.x for s in traj.states], [s.z for s in traj.states], None if c is None else (c.center_z, c.radius), args.plot
        )
    return EXIT_OK


def _read_trajectory(path):
    rows = io.read_csv(path)
    if len(rows) < 2:
        raise InvalidInput("trajectory needs at least two rows")
    times, rhos = [], []
    try:
        for k, r in enumerate(rows):
            t = r.get("t", r.get("step", k))
            y = float(r.get("y") or 0.0)
            s = BlochState(float(r["x"]), y, float(r["z"]))
            times.append(float(t))
            rhos.append(s.density())
    except (KeyError, ValueError, TypeError) as e:
        raise InvalidInput(f"malformed trajectory row: {e}") from None
    return times, rhos


def cmd_free_energy_audit(args) -> int:
    levels = [float(v) for v in args.levels.split(",")]
    spec = EnergySpec(levels, args.beta)
    if spec.dim != 2:
        raise UnsupportedDimension("trajectory files describe qubits; give two levels")
    times, rhos = _read_trajectory(args.trajectory)
    audit = audit_trajectory(rhos, spec, times)
    _emit(args, io.csv_text(["t", "F", "F_Q", "A"], audit.rows()))
    if args.plot:
        from . import plotting

        plotting.free_energy(audit.times, audit.F_classical, audit.F_quantum, audit.asymmetry, spec.beta, args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="embedlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the primary output here instead of stdout")
    common.add_argument("--seed", type=lambda s: int(s, 0), help="RNG seed (fallback: $EMBEDLAB_SEED, then 0)")
    plot = argparse.ArgumentParser(add_help=False)
    plot.add_argument("--plot", metavar="PNG", help="also render a figure to this file")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed-check", parents=[common], help="classical embeddability verdict")
    p.add_argument("--matrix", help="stochastic matrix JSON")
    p.add_argument("--circulant", nargs=2, type=float, metavar=("A", "B"))
    p.set_defaults(func=cmd_embed_check)

    p = sub.add_parser("qembed", parents=[common], help="explicit Markovian quantum realisation")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_qembed)

    p = sub.add_parser("region-scan", parents=[common, plot], help="classify 3x3 circulants on a grid")
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.set_defaults(func=cmd_region_scan)

    p = sub.add_parser("cost-table", parents=[common, plot], help="time cost against memory size")
    p.add_argument("--function", required=True, help="f1, f2, or a JSON function/matrix file")
    p.add_argument("--bits", type=int)
    p.add_argument("--mem", help="comma-separated memory sizes")
    p.set_defaults(func=cmd_cost_table)

    p = sub.add_parser("typicality", parents=[common], help="statistics of random functions")
    p.add_argument("--d", type=int, default=1000)
    p.add_argument("--trials", type=int, default=2000)
    p.set_defaults(func=cmd_typicality)

    p = sub.add_parser("access-region", parents=[common], help="states reachable under a fixed point")
    p.add_argument("--p", required=True)
    p.add_argument("--gamma", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lp", action="store_true", help="linear programming (default)")
    g.add_argument("--closed-form", action="store_true")
    p.set_defaults(func=cmd_access_region)

    p = sub.add_parser("qubit-path", parents=[common, plot], help="evolution along an extremal circle")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--delta", type=float, help="signed step in z")
    p.add_argument("--steps", type=int, default=100, help="equal steps to the circle's end when --delta is absent")
    p.add_argument("--descend", action="store_true", help="with --steps: follow the lower circle")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.set_defaults(func=cmd_qubit_path)

    p = sub.add_parser("free-energy-audit", parents=[common, plot], help="free energy along a trajectory")
    p.add_argument("--trajectory", required=True, help="CSV with x, z (optional y, t or step)")
    p.add_argument("--levels", required=True, help="E1,E2")
    p.add_argument("--beta", type=float, required=True)
    p.set_defaults(func=cmd_free_energy_audit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EmbedlabError as e:
        err = {"error": e.kind, "message": str(e)}
    except (ValueError, OSError) as e:
        err = {"error": "invalid-input", "message": str(e)}
    sys.stderr.write(json.dumps(err) + "\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
