"""Command-line interface.

Exit codes: 0 on success, 1 when a requested verdict (certification or
theorem condition) comes back negative, 2 on usage errors including
malformed input files.

The environment variable MOMENTFORGE_THREADS, when set, pins the BLAS
thread count before numpy is first imported; all numerical imports in
this module are deferred for that reason."""

from __future__ import annotations

import argparse
import json
import os
import sys


def _setup_threads() -> None:
    t = os.environ.get("MOMENTFORGE_THREADS")
    if not t:
        return
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS",
                "BLIS_NUM_THREADS"):
        os.environ.setdefault(var, t)


def _emit(obj, path: str | None) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, indent=1,
                                                       default=float)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_input(path: str):
    from .cgraph import DegreeTwoInput
    from .harness import load_matrix
    M, residual = load_matrix(path)
    if residual > 0:
        print(f"symmetrized {path}: max asymmetry {residual:.3g}",
              file=sys.stderr)
    return DegreeTwoInput(M, allow_indefinite=True)


def _half_degree(degree: int) -> int:
    if degree % 2 or degree < 2:
        raise SystemExit(f"error: --degree must be even and >= 2, "
                         f"got {degree}")
    return degree // 2


def cmd_extend(args) -> int:
    from .extend import (certify, extend, extend_degree6_lowrank,
                         pseudoexpectation_to_json)
    Min = _load_input(args.matrix)
    if args.lowrank:
        if args.degree != 6:
            raise SystemExit("error: --lowrank requires --degree 6")
        t = args.t_pow if args.t_pow is not None else 0.0
        E = extend_degree6_lowrank(Min, t)
    else:
        E = extend(Min, _half_degree(args.degree))
    _emit(pseudoexpectation_to_json(E), args.out)
    if args.certify:
        report = certify(E, M=Min, basis=args.basis, tol=args.tol)
        _emit(report.to_json_dict(), args.report)
        return 0 if report.ok else 1
    return 0


def cmd_certify(args) -> int:
    from .extend import certify, pseudoexpectation_from_json
    with open(args.values) as fh:
        E = pseudoexpectation_from_json(fh.read())
    Min = _load_input(args.matrix) if args.matrix else None
    report = certify(E, M=Min, basis=args.basis, tol=args.tol)
    _emit(report.to_json_dict(), args.out)
    return 0 if report.ok else 1


def cmd_incoherence(args) -> int:
    from . import incoherence as inc
    Min = _load_input(args.matrix)
    if args.deg6:
        rep = inc.check_theorem_deg6(Min, args.t_pow, mode=args.mode,
                                     samples=args.samples,
                                     k_cap=args.k_cap, seed=args.seed)
    else:
        rep = inc.check_theorem1(Min, args.degree, mode=args.mode,
                                 samples=args.samples,
                                 k_cap=args.k_cap, seed=args.seed)
    _emit(rep.to_json(), args.out)
    return 0 if rep.verdict else 1


def cmd_laurent(args) -> int:
    from .extend import certify, extend, pseudoexpectation_to_json
    from .harness import laurent_closed_form, laurent_matrix, save_matrix
    Min = laurent_matrix(args.n, args.alpha)
    if args.out_matrix:
        save_matrix(args.out_matrix, Min.matrix)
    info = {"N": args.n, "alpha": args.alpha,
            "offdiag": float(Min.matrix[0, 1]),
            "min_eig": Min.min_eig,
            "closed_form": {str(m): laurent_closed_form(args.n, m)
                            for m in range(0, min(args.n, 8) + 1, 2)}}
    if args.degree:
        E = extend(Min, _half_degree(args.degree))
        if args.out:
            _emit(pseudoexpectation_to_json(E), args.out)
        if args.certify:
            report = certify(E, M=Min, basis=args.basis, tol=args.tol)
            info["certification"] = report.to_json_dict()
            _emit(info, None)
            return 0 if report.ok else 1
    _emit(info, None)
    return 0


def cmd_projector(args) -> int:
    from .extend import certify, extend
    from .harness import projector_instance, save_matrix
    kind = {"projector_high_rank": "high", "projector_low_rank": "low",
            "high": "high", "low": "low"}[args.kind]
    Min = projector_instance(args.n, args.rank, args.alpha, kind,
                             seed=args.seed)
    if args.out_matrix:
        save_matrix(args.out_matrix, Min.matrix)
    info = {"N": args.n, "rank": args.rank, "alpha": args.alpha,
            "kind": kind, "seed": args.seed, "min_eig": Min.min_eig,
            "op_norm": Min.op_norm,
            "unit_diag_residual": Min.unit_diagonal_residual()}
    if args.degree:
        E = extend(Min, _half_degree(args.degree))
        if args.certify:
            report = certify(E, M=Min, basis=args.basis, tol=args.tol)
            info["certification"] = report.to_json_dict()
            _emit(info, args.out)
            return 0 if report.ok else 1
    _emit(info, args.out)
    return 0


def cmd_sk(args) -> int:
    from .harness import sk_run
    seeds = ([int(s) for s in args.seeds.split(",")] if args.seeds
             else list(range(args.seed, args.seed + args.trials)))
    results = []
    ok = True
    for seed in seeds:
        out = sk_run(args.n, seed, alpha=args.alpha, delta=args.delta,
                     t_pow=args.t_pow, c_cap=args.c_cap, tol=args.tol,
                     certify_matrix=not args.no_certify)
        results.append(out)
        if not args.no_certify:
            ok = ok and out.get("psd_ok", False)
        print(json.dumps(out, default=float), flush=True)
    if args.out:
        _emit(results, args.out)
    return 0 if ok else 1


def cmd_forests(args) -> int:
    from .forests import enumerate_good_forests
    rows = []
    sizes = [args.leaves] if args.leaves else list(range(2, args.max + 1, 2))
    for m in sizes:
        forests = enumerate_good_forests(m)
        trees = [f for f in forests if f.is_tree()]
        rows.append({"leaves": m, "forests": len(forests),
                     "trees": len(trees),
                     "mu_sum": sum(f.mu() for f in forests)})
        if args.list:
            for f in (trees if args.trees_only else forests):
                print(f"m={m} mu={f.mu()} {f}")
    _emit(rows, args.out)
    return 0


def cmd_selftest(args) -> int:
    import itertools
    import math

    import numpy as np

    from .combinat import nu
    from .extend import (certify, err_value, extend,
                         identity_pseudoexpectation, main_value)
    from .forests import (enumerate_good_forests, star_mobius_recursion,
                          verify_mobius, verify_xi)

    full = args.level == "full"
    failures = []

    def check(name, cond):
        print(f"{'ok  ' if cond else 'FAIL'} {name}")
        if not cond:
            failures.append(name)

    for m in range(2, (9 if full else 7), 2):
        check(f"mobius defining relations m={m}", verify_mobius(m).ok)
    check("nu series (1, -2, 16, -272)",
          [nu(k) for k in (2, 4, 6, 8)] == [1, -2, 16, -272])
    check("star recursion (-1 then (m-2)!)",
          star_mobius_recursion(2) == -1
          and all(star_mobius_recursion(m) == math.factorial(m - 2)
                  for m in (4, 6, 8)))
    counts = {m: len(enumerate_good_forests(m)) for m in (2, 4, 6)}
    check("forest counts (1, 4, 41)", counts == {2: 1, 4: 4, 6: 41})
    for l_, m_ in ((2, 2), (3, 3)) if full else ((2, 2),):
        check(f"xi identity l={l_} m={m_}", verify_xi(l_, m_).ok)

    rng = np.random.default_rng(0)
    V = rng.standard_normal((5, 5)) / np.sqrt(5)
    A = V @ V.T
    d = np.sqrt(np.diag(A))
    A = A / np.outer(d, d)
    E = extend(A, 2)
    i, j, k, l_ = 0, 1, 2, 3
    closed = (A[i, j] * A[k, l_] + A[i, k] * A[j, l_]
              + A[i, l_] * A[j, k]
              - 2 * sum(A[a, i] * A[a, j] * A[a, k] * A[a, l_]
                        for a in range(5)))
    check("degree-4 closed form",
          abs(E.value_on_set((i, j, k, l_)) - closed) < 1e-12)

    B = np.eye(3)
    B[0, 1] = B[1, 0] = 0.4
    B[0, 2] = B[2, 0] = -0.25
    B[1, 2] = B[2, 1] = 0.1
    E3 = extend(B, 3)
    worst = 0.0
    for size in range(2, (7 if full else 5), 2):
        for s in itertools.combinations_with_replacement(range(3), size):
            lhs = E3.evaluate(s)
            rhs = main_value(B, s) + err_value(B, s)
            worst = max(worst, abs(lhs - rhs))
    check(f"error decomposition (worst {worst:.2e})", worst < 1e-10)

    rep = certify(identity_pseudoexpectation(4, 4))
    check("identity certification", rep.ok and rep.min_eigenvalue > 0.99)

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="forge",
        description="Higher-degree pseudomoment extensions over the "
                    "hypercube: construction, certification, incoherence "
                    "reports, and experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_basis_tol(q):
        q.add_argument("--basis", default="monomial",
                       choices=["monomial", "multiharmonic"])
        q.add_argument("--tol", type=float, default=1e-8)

    q = sub.add_parser("extend", help="extend a matrix file to a "
                       "higher-degree pseudoexpectation")
    q.add_argument("--matrix", required=True)
    q.add_argument("--degree", type=int, required=True)
    q.add_argument("--lowrank", action="store_true",
                   help="use the degree-6 low-rank construction")
    q.add_argument("--t-pow", type=float, default=None)
    q.add_argument("--certify", action="store_true")
    q.add_argument("--out", help="write the pseudoexpectation here")
    q.add_argument("--report", help="write the certification report here")
    add_basis_tol(q)
    q.set_defaults(func=cmd_extend)

    q = sub.add_parser("certify", help="certify a serialized "
                       "pseudoexpectation")
    q.add_argument("--values", required=True,
                   help="pseudoexpectation JSON file")
    q.add_argument("--matrix", help="degree-2 input (needed for the "
                   "multiharmonic basis)")
    q.add_argument("--out")
    add_basis_tol(q)
    q.set_defaults(func=cmd_certify)

    q = sub.add_parser("incoherence", help="incoherence quantities and "
                       "extension-theorem verdict")
    q.add_argument("--matrix", required=True)
    q.add_argument("--degree", type=int, default=4)
    q.add_argument("--mode", default="auto",
                   choices=["auto", "exact", "sampled"])
    q.add_argument("--samples", type=int, default=10_000)
    q.add_argument("--k-cap", type=int, default=40)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--deg6", action="store_true",
                   help="evaluate the degree-6 low-rank condition instead")
    q.add_argument("--t-pow", type=float, default=0.0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_incoherence)

    q = sub.add_parser("laurent", help="Laurent instance: matrix, exact "
                       "moments, optional extension + certification")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--alpha", type=float, default=0.0)
    q.add_argument("--degree", type=int, default=0)
    q.add_argument("--certify", action="store_true")
    q.add_argument("--out")
    q.add_argument("--out-matrix")
    add_basis_tol(q)
    q.set_defaults(func=cmd_laurent)

    q = sub.add_parser("projector", help="random projector-like instance")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--rank", type=int, required=True)
    q.add_argument("--alpha", type=float, default=0.1)
    q.add_argument("--kind", default="low",
                   choices=["high", "low", "projector_high_rank",
                            "projector_low_rank"])
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--degree", type=int, default=0)
    q.add_argument("--certify", action="store_true")
    q.add_argument("--out")
    q.add_argument("--out-matrix")
    add_basis_tol(q)
    q.set_defaults(func=cmd_projector)

    q = sub.add_parser("sk", help="degree-6 GOE experiment")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--trials", type=int, default=1)
    q.add_argument("--seeds", help="comma-separated explicit seed list")
    q.add_argument("--alpha", type=float, default=0.1)
    q.add_argument("--delta", type=float, default=0.05)
    q.add_argument("--t-pow", type=float, default=None)
    q.add_argument("--c-cap", type=float, default=0.9)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--no-certify", action="store_true")
    q.add_argument("--out")
    q.set_defaults(func=cmd_sk)

    q = sub.add_parser("forests", help="enumerate and count good forests")
    q.add_argument("--leaves", type=int)
    q.add_argument("--max", type=int, default=8)
    q.add_argument("--trees-only", action="store_true")
    q.add_argument("--list", action="store_true")
    q.add_argument("--out")
    q.set_defaults(func=cmd_forests)

    q = sub.add_parser("selftest", help="run the built-in identity suites")
    q.add_argument("--level", default="quick", choices=["quick", "full"])
    q.set_defaults(func=cmd_selftest)

    return p


def main(argv=None) -> int:
    _setup_threads()
    parser = build_parser()
    args = parser.parse_args(argv)
    from .harness import MatrixFileError
    try:
        return args.func(args)
    except MatrixFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
