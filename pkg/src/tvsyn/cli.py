"""Command-line frontend.

One subcommand per pipeline stage; all reports are JSON objects with the
fixed schema tag "tvsyn-report v1" and embed the resolved configuration,
so identical inputs produce byte-identical outputs.

Exit codes: 0 success, 2 validation/parse error, 3 assumption (A1/A3 or
positivity) failure, 4 solver non-convergence.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import (AssumptionViolationError, InvalidInputError,
                     NotPositiveDefiniteError, SolverNonConvergenceError,
                     TvsynError)
from .factorization import check_A1, inner_outer, outer_inner
from .dual_program import bounds_sweep, dual_solve
from .nest_distance import (SynthesisOptions, plant_from_symbol,
                            reduce_to_distance, synthesize)
from .mixed_sensitivity import build_mixed_plant, mixed_synthesize
from .operator_core import CausalOperator, spectral_norm
from .plant_lab import (PlantSpec, generate, load_operator, save_operator,
                        simulate_closed_loop, worst_case_disturbance)
from .tv_hankel import hankel_norm

SCHEMA = "tvsyn-report v1"


def _threads():
    raw = os.environ.get("TVSYN_THREADS", "1")
    try:
        return max(int(raw), 0)
    except ValueError:
        raise InvalidInputError(f"TVSYN_THREADS must be an integer, got {raw!r}")


def _emit(report, out):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(command, config, results, provenance=()):
    return {"schema": SCHEMA, "command": command, "config": config,
            "results": results, "provenance": list(provenance)}


def _load(path, fmt, causal=False):
    if path is None:
        return None
    return load_operator(path, format=fmt, causal=causal)


def _matrix_out(base, suffix, M, fmt):
    path = f"{base}.{suffix}.{fmt}" if base else None
    if path:
        save_operator(M, path, format=fmt)
    return path


def _cmd_gen(args):
    impulse = None
    if args.impulse:
        impulse = [float(x) for x in args.impulse.split(",")]
    spec = PlantSpec(kind=args.kind, dim=args.dim, seed=args.seed,
                     decay=args.decay, period=args.period,
                     impulse_response=impulse, diag_shift=args.diag_shift)
    A = generate(spec)
    if not args.out:
        raise InvalidInputError("gen requires --out")
    save_operator(A, args.out, format=args.format)
    _emit(_report("gen", _config(args), {"dim": A.dim, "path": args.out}),
          None)
    return 0


def _cmd_factor(args):
    T = _load(args.t1, args.format, causal=True)
    if T is None:
        raise InvalidInputError("factor requires --t1")
    io = inner_outer(T, tol=args.tol)
    oi = outer_inner(T, tol=args.tol)
    paths = {
        "inner": _matrix_out(args.out, "inner", io.inner, args.format),
        "outer": _matrix_out(args.out, "outer", io.outer, args.format),
    }
    results = {
        "inner_outer_reconstruction": float(
            np.linalg.norm(io.product() - T.entries, 2)),
        "outer_inner_reconstruction": float(
            np.linalg.norm(oi.product() - T.entries, 2)),
        "outer_condition": float(np.linalg.cond(io.outer.entries)),
        "files": paths,
    }
    _emit(_report("factor", _config(args), results,
                  ["factor:anti-cholesky"]), args.out and args.out + ".json")
    return 0


def _plant_from_args(args):
    T1 = _load(args.t1, args.format, causal=args.causal_inputs)
    if T1 is None:
        raise InvalidInputError("--t1 is required")
    if args.t2 or args.t3:
        n = T1.dim if isinstance(T1, CausalOperator) else T1.shape[0]
        T2 = _load(args.t2, args.format, causal=True) or CausalOperator.identity(n)
        T3 = _load(args.t3, args.format, causal=True) or CausalOperator.identity(n)
        rep = check_A1(T2, T3, tol=args.tol)
        if not rep.passed:
            raise AssumptionViolationError(
                "assumption A1 failed: " + "; ".join(rep.failures),
                assumption="A1",
                condition_number=max(rep.t2_condition, rep.t3_condition))
        T1c = T1 if isinstance(T1, CausalOperator) else CausalOperator(np.tril(T1))
        return reduce_to_distance(T1c, T2, T3, tol=args.tol)
    sym = T1.entries if isinstance(T1, CausalOperator) else T1
    return plant_from_symbol(sym)


def _cmd_synth(args):
    plant = _plant_from_args(args)
    opts = SynthesisOptions(tol=args.tol, truncation=args.n,
                            run_dual_solve=args.sdp)
    res = synthesize(plant, opts)
    qpath = _matrix_out(args.out, "q", res.Q, args.format)
    results = {
        "mu_primal": res.mu_primal,
        "mu_dual": res.mu_dual,
        "gap": res.gap,
        "argmax_level": res.argmax_level,
        "allpass_defect": (None if res.allpass_defect != res.allpass_defect
                           else res.allpass_defect),
        "truncation": args.n or plant.dim,
        "warning": res.warning,
        "q_file": qpath,
    }
    _emit(_report("synth", _config(args), results, res.method_tags),
          args.out and args.out + ".json")
    return 0


def _cmd_dual(args):
    B = _load(args.t1, args.format)
    if B is None:
        raise InvalidInputError("--t1 is required")
    cert = dual_solve(B, max_iter=args.max_iter, tol=args.tol)
    results = {
        "value": cert.value,
        "alignment_residual": cert.alignment_residual,
        "iterations": cert.iterations,
        "converged": cert.converged,
        "trace_norm": cert.T.trace_norm(),
    }
    _matrix_out(args.out, "t", cert.T.entries, args.format)
    _emit(_report("dual", _config(args), results, ["dual:sdp-admm"]),
          args.out and args.out + ".json")
    return 0


def _cmd_bounds(args):
    B = _load(args.t1, args.format)
    if B is None:
        raise InvalidInputError("--t1 is required")
    ns = [int(x) for x in args.n_list.split(",")] if args.n_list else \
        sorted({min(2 ** k, B.shape[0]) for k in range(2, 30)
                if 2 ** k <= B.shape[0]} | {B.shape[0]})
    rows = bounds_sweep(B, ns, threads=_threads())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("N,mu_dual,mu_primal,gap\n")
            for r in rows:
                fh.write(f"{r.n},{r.mu_dual!r},{r.mu_primal!r},{r.gap!r}\n")
    results = {"rows": [[r.n, r.mu_dual, r.mu_primal, r.gap] for r in rows],
               "final_gap": rows[-1].gap}
    _emit(_report("bounds", _config(args), results,
                  ["bounds:corner-sweep"]), args.out and args.out + ".json")
    return 0


def _cmd_hankel(args):
    B = _load(args.t1, args.format)
    if B is None:
        raise InvalidInputError("--t1 is required")
    nrm, A = hankel_norm(B)
    _matrix_out(args.out, "maximizer", A, args.format)
    _emit(_report("hankel", _config(args), {"norm": nrm},
                  ["hankel:materialized-svd"]), args.out and args.out + ".json")
    return 0


def _cmd_mixsens(args):
    W = _load(args.w, args.format, causal=True)
    V = _load(args.v, args.format, causal=True)
    P = _load(args.p, args.format, causal=True)
    if W is None or V is None or P is None:
        raise InvalidInputError("mixsens requires --w, --v and --p")
    mp = build_mixed_plant(W, V, P, tol=args.tol)
    res = mixed_synthesize(mp)
    qpath = _matrix_out(args.out, "q", res.Q, args.format)
    results = {
        "mu_o": res.mu_o,
        "method_values": res.method_values,
        "allpass_defect": res.allpass_defect,
        "q_file": qpath,
    }
    _emit(_report("mixsens", _config(args), results,
                  ["mixed:hankel-toeplitz", "mixed:gamma-projection",
                   "mixed:direct-convex"]), args.out and args.out + ".json")
    return 0


def _cmd_simulate(args):
    T1 = _load(args.t1, args.format, causal=True)
    Q = _load(args.q, args.format, causal=True)
    if T1 is None or Q is None:
        raise InvalidInputError("simulate requires --t1 and --q")
    n = T1.dim
    T2 = _load(args.t2, args.format, causal=True) or CausalOperator.identity(n)
    T3 = _load(args.t3, args.format, causal=True) or CausalOperator.identity(n)
    w, degenerate = worst_case_disturbance(T1, T2, T3, Q)
    z, gain = simulate_closed_loop(T1, T2, T3, Q, w)
    results = {
        "worst_case_gain": gain,
        "degenerate": degenerate,
        "closed_loop_norm": spectral_norm(
            T1.entries - T2.entries @ Q.entries @ T3.entries),
    }
    _emit(_report("simulate", _config(args), results, ["simulate:svd"]),
          args.out and args.out + ".json")
    return 0


def _config(args):
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func",):
            continue
        cfg[k] = v
    return cfg


def _add_common(p):
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    ap = argparse.ArgumentParser(prog="tvsyn",
                                 description="time-varying controller "
                                 "synthesis via triangular distance problems")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a test plant")
    g.add_argument("--kind", default="random_causal")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--decay", type=float, default=1.0)
    g.add_argument("--period", type=int, default=None)
    g.add_argument("--impulse", default=None,
                   help="comma-separated impulse response (lti_toeplitz)")
    g.add_argument("--diag-shift", type=float, default=0.0)
    _add_common(g)
    g.set_defaults(func=_cmd_gen)

    f = sub.add_parser("factor", help="inner-outer factorization report")
    f.add_argument("--t1", required=True)
    _add_common(f)
    f.set_defaults(func=_cmd_factor)

    s = sub.add_parser("synth", help="synthesize the optimal Q")
    s.add_argument("--t1", required=True)
    s.add_argument("--t2", default=None)
    s.add_argument("--t3", default=None)
    s.add_argument("--n", type=int, default=None, help="truncation order")
    s.add_argument("--ambient", type=int, default=None,
                   help="expected ambient dim (validated against --t1)")
    s.add_argument("--sdp", action="store_true",
                   help="also run the iterative dual solver")
    s.add_argument("--causal-inputs", action="store_true",
                   help="require --t1 to be causal (otherwise it is treated "
                   "as a raw symbol when --t2/--t3 are absent)")
    _add_common(s)
    s.set_defaults(func=_cmd_synth)

    d = sub.add_parser("dual", help="iterative dual certificate")
    d.add_argument("--t1", required=True)
    d.add_argument("--max-iter", type=int, default=5000)
    _add_common(d)
    d.set_defaults(func=_cmd_dual)

    b = sub.add_parser("bounds", help="two-sided bound sweep")
    b.add_argument("--t1", required=True)
    b.add_argument("--n-list", default=None,
                   help="comma-separated truncation orders")
    _add_common(b)
    b.set_defaults(func=_cmd_bounds)

    h = sub.add_parser("hankel", help="Hankel norm and maximizer")
    h.add_argument("--t1", required=True)
    _add_common(h)
    h.set_defaults(func=_cmd_hankel)

    m = sub.add_parser("mixsens", help="mixed sensitivity synthesis")
    m.add_argument("--w", required=True)
    m.add_argument("--v", required=True)
    m.add_argument("--p", required=True)
    _add_common(m)
    m.set_defaults(func=_cmd_mixsens)

    si = sub.add_parser("simulate", help="closed-loop worst-case simulation")
    si.add_argument("--t1", required=True)
    si.add_argument("--t2", default=None)
    si.add_argument("--t3", default=None)
    si.add_argument("--q", required=True)
    _add_common(si)
    si.set_defaults(func=_cmd_simulate)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if getattr(args, "ambient", None) is not None and args.t1:
            B = load_operator(args.t1, format=args.format)
            if B.shape[0] != args.ambient:
                raise InvalidInputError(
                    f"--ambient {args.ambient} does not match --t1 dim "
                    f"{B.shape[0]}")
        return args.func(args)
    except (InvalidInputError, OSError) as e:
        print(f"tvsyn: error: {e}", file=sys.stderr)
        return 2
    except (AssumptionViolationError, NotPositiveDefiniteError) as e:
        print(f"tvsyn: assumption failure: {e}", file=sys.stderr)
        return 3
    except SolverNonConvergenceError as e:
        print(f"tvsyn: solver did not converge: {e}", file=sys.stderr)
        return 4
    except TvsynError as e:
        print(f"tvsyn: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
