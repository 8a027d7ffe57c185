"""Command-line interface.

Exit codes: 0 success, 1 a property check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperdev", description="Hypergraph deviation toolkit.")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker cap (default: $HYPERDEV_THREADS or 1)")
    ap.add_argument("--output", "-o", default=None, help="write JSON here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("delta-prime", help="Δ′ with per-edge dominating bases")
    c.add_argument("graph", help="builtin name (e.g. clique:4:2) or hypergraph JSON")

    c = sub.add_parser("norm", help="dual norm of a tensor for one base")
    c.add_argument("--tensor", required=True)
    c.add_argument("--base", required=True)
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--mode", choices=("exact", "heuristic", "auto"), default="auto")
    c.add_argument("--center", action="store_true", help="use tensor − pJ")
    c.add_argument("--restarts", type=int, default=16)
    c.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("decompose", help="greedy decomposition with verification")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--tensor")
    src.add_argument("--sample", type=int, metavar="N", help="draw A ~ μ_p on N vertices (r=2)")
    c.add_argument("--base", required=True)
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--kappa", type=float, required=True)
    c.add_argument("--oracle", choices=("exact", "heuristic"), default="exact")
    c.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("hom", help="homomorphism count and densities")
    c.add_argument("--graph", required=True)
    c.add_argument("--tensor", required=True)
    c.add_argument("--p", type=float, default=None)
    c.add_argument("--induced", action="store_true")

    def tail_args(c):
        c.add_argument("--graph", required=True, action="append", help="repeat for joint problems")
        c.add_argument("--n", type=int, required=True)
        c.add_argument("--p", type=float, required=True)
        c.add_argument("--delta", type=_floats, required=True, help="one value per graph")
        c.add_argument("--direction", choices=("upper", "lower"), default="upper")
        c.add_argument("--induced", action="store_true")
        c.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("phi", help="entropic variational problem (best-of solver)")
    tail_args(c)
    c.add_argument("--restarts", type=int, default=2)

    c = sub.add_parser("psi", help="lower-tail variational properties along an n-ladder")
    c.add_argument("--graph", required=True)
    c.add_argument("--ns", type=_ints, required=True)
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--delta", type=float, required=True)

    c = sub.add_parser("tail", help="tail probability")
    tail_args(c)
    c.add_argument("--method", choices=("exact", "binomial", "mc", "tilted"), default="exact")
    c.add_argument("--samples", type=int, default=10000)

    c = sub.add_parser("verify", help="run a named property suite")
    c.add_argument("suite")
    c.add_argument("--seed", type=int, default=0)
    return ap


def _threads(args) -> int:
    raw = args.threads if args.threads is not None else os.environ.get("HYPERDEV_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise SystemExit(f"hyperdev: HYPERDEV_THREADS must be an integer, got {raw!r}")
    k = max(1, k)
    for var in _THREAD_VARS:
        os.environ.setdefault(var, str(k))
    return k


def _problem(args):
    from .io import InputError, read_graph
    from .variational import TailProblem

    graphs = [read_graph(g) for g in args.graph]
    deltas = args.delta
    if len(deltas) == 1 and len(graphs) > 1:
        deltas = deltas * len(graphs)
    if len(deltas) != len(graphs):
        raise InputError("give one delta per graph")
    return TailProblem(graphs, deltas, args.n, args.p, args.direction, induced=args.induced)


def _run(args) -> tuple[dict, int]:
    import numpy as np

    from . import io

    if args.command == "delta-prime":
        from .hypergraph import delta_prime

        g = io.read_graph(args.graph)
        cert = delta_prime(g)
        per_edge = [{"edge": list(e), "value": str(v),
                     "members": [sorted(b) for b in base.members]}
                    for e, (base, v) in cert.per_edge.items()]
        return {"graph": io.graph_to_json(g), "value": str(cert.value), "per_edge": per_edge}, EXIT_OK

    if args.command == "norm":
        from .norms import dual_norm
        from .tensors import jay

        Z = io.read_tensor(args.tensor)
        wb = io.read_base(args.base)
        arr = Z.dense() - (args.p * jay(Z.n, Z.r).dense() if args.center else 0)
        cert = dual_norm(arr, wb, args.p, mode=args.mode, restarts=args.restarts, seed=args.seed)
        return {"base": io.base_to_json(wb), "p": args.p, "certificate": cert.to_json()}, EXIT_OK

    if args.command == "decompose":
        from .decomposition import decompose, verify_result
        from .tensors import ErModel, sample

        wb = io.read_base(args.base)
        if args.tensor:
            A = io.read_tensor(args.tensor)
        else:
            A = sample(ErModel(args.sample, wb.r, args.p), args.seed)
        res = decompose(A, wb, args.p, args.eps, args.kappa, oracle=args.oracle, seed=args.seed)
        report = verify_result(A, res, wb, args.p, args.eps, args.kappa, oracle=args.oracle)
        out = res.to_json()
        out.update(k=res.k, verification=report, seed=args.seed)
        return out, EXIT_OK if report["all_pass"] else EXIT_VIOLATION

    if args.command == "hom":
        from .homomorphism import hom_count, induced_hom

        H = io.read_graph(args.graph)
        S = io.read_tensor(args.tensor)
        if H.r != S.r:
            raise io.InputError("graph and tensor uniformities differ")
        count = induced_hom(H, S) if args.induced else hom_count(H, S)
        t = count / float(S.n) ** H.num_vertices
        out = {"hom": count, "t": t, "induced": args.induced}
        if args.p is not None:
            out["tp"] = t / args.p ** H.num_edges
        return out, EXIT_OK

    if args.command == "phi":
        from .variational import phi_lower_bound_reference, solve

        prob = _problem(args)
        sol = solve(prob, init=args.seed, restarts=args.restarts)
        out = sol.to_json()
        out["seed"] = args.seed
        try:
            out["normalized"] = sol.value / phi_lower_bound_reference(prob.graphs[0], prob.n, prob.p)
        except ValueError:
            out["normalized"] = None
        return out, EXIT_OK

    if args.command == "psi":
        from .variational import psi_properties_check

        rep = psi_properties_check(io.read_graph(args.graph), args.ns, args.p, args.delta)
        return rep, EXIT_OK if rep["holds"] else EXIT_VIOLATION

    if args.command == "tail":
        from . import tails
        from .variational import solve

        prob = _problem(args)
        if args.method == "exact":
            est = tails.tail_exact_enum(prob)
        elif args.method == "binomial":
            est = tails.tail_binomial(prob)
        elif args.method == "mc":
            est = tails.tail_mc(prob, args.samples, args.seed)
        else:
            from .tensors import SymTensor

            Q = solve(prob, init=args.seed).Q
            est = tails.tail_tilted(prob, SymTensor(Q.n, Q.r, np.clip(Q.values, 1e-3, 1 - 1e-3)),
                                    args.samples, args.seed)
        return est.to_json(), EXIT_OK

    if args.command == "verify":
        from .suites import SUITES, run_suite

        if args.suite not in SUITES:
            raise io.InputError(f"unknown suite {args.suite!r}; available: {', '.join(SUITES)}")
        rep = run_suite(args.suite, seed=args.seed)
        return rep, EXIT_OK if rep["passed"] else EXIT_VIOLATION

    raise io.InputError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    threads = _threads(args)

    from .io import dumps
    from .norms import InfeasibleError

    try:
        out, code = _run(args)
    except InfeasibleError as exc:
        print(f"hyperdev: {exc}; rerun with --oracle heuristic (or --mode heuristic)",
              file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError, OSError) as exc:
        print(f"hyperdev: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = dict(out)
    out.setdefault("command", args.command)
    out["threads"] = threads
    text = dumps(out)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
