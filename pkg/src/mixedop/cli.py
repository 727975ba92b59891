"""``mixedop`` command line.

Every subcommand reads JSON documents (see :mod:`mixedop.io`), prints a short
human-readable summary, and with ``-o`` writes its result document. ``--json``
prints the document to stdout instead of the summary. Exit codes: 0 success,
2 singular / not invertible, 3 malformed input, 4 dimension mismatch,
5 budget or size cap exceeded (also non-convergent series).
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import io
from .algebra import (
    MixedOperator,
    apply,
    compose,
    identity_operator,
    linear_combine,
    norm_L,
    refine_operator,
    to_common_resolution,
)
from .errors import DimensionMismatch, MalformedInput, MixedOpError, NotInvertible
from .factorization import factorize, inverse
from .oracle import full_matrix, oracle_det, oracle_eigenvalues, oracle_inverse
from .spectral import make_grid, spectrum_scan
from .staircase import StaircaseFunction, refine_function
from .tracedet import (
    determinant,
    determinant_fredholm,
    det_log_series,
    det_plemelj_smithies,
    trace,
)

EXIT_OK = 0


def _complex_arg(text: str) -> complex:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}") from None
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")


def _load_op(path) -> MixedOperator:
    return io.operator_from_doc(io.read(path))


def _fmt(z: complex) -> str:
    return f"{z.real:.6g}{z.imag:+.6g}j"


def _summary_op(A: MixedOperator) -> str:
    N, M, p = A.dims()
    lines = [f"operator N={N} M={M} p={p} norm_L={norm_L(A):.6g}"]
    for alpha, K in A.terms.items():
        lines.append(f"  alpha={list(alpha)} shape={K.shape} max|K|={np.max(np.abs(K)):.6g}")
    return "\n".join(lines)


def _summary_c(c) -> str:
    lines = [f"C-element N={c.N} (2^N = {len(c.components)} components)"]
    for alpha, v in c.components.items():
        flat = v.reshape(-1)
        shown = ", ".join(_fmt(z) for z in flat[:4]) + (", ..." if flat.size > 4 else "")
        lines.append(f"  alpha={list(alpha)}: {shown}")
    return "\n".join(lines)


# -- subcommands --------------------------------------------------------------

def cmd_info(args):
    A = _load_op(args.A)
    return io.operator_to_doc(A), _summary_op(A)


def cmd_apply(args):
    A = _load_op(args.op)
    u = io.function_from_doc(io.read(args.fn))
    if (u.N, u.M) != (A.N, A.M):
        raise DimensionMismatch(f"operator has N={A.N} M={A.M}, function N={u.N} M={u.M}")
    p = math.lcm(A.p, u.p)
    A = refine_operator(A, p // A.p)
    u = refine_function(u, p // u.p)
    v = apply(A, u)
    return io.function_to_doc(v), f"function N={v.N} M={v.M} p={v.p} max|v|={np.max(np.abs(v.values)):.6g}"


def _common(A, B):
    if (A.N, A.M) != (B.N, B.M):
        raise DimensionMismatch(f"operands have (N, M) = {(A.N, A.M)} and {(B.N, B.M)}")
    return to_common_resolution(A, B)


def cmd_compose(args):
    A, B = _common(_load_op(args.A), _load_op(args.B))
    C = compose(A, B)
    return io.operator_to_doc(C), _summary_op(C)


def cmd_combine(args):
    A, B = _common(_load_op(args.A), _load_op(args.B))
    C = linear_combine(args.la, A, args.mu, B)
    return io.operator_to_doc(C), _summary_op(C)


def cmd_refine(args):
    if args.factor < 1:
        raise MalformedInput("--factor must be >= 1")
    B = refine_operator(_load_op(args.A), args.factor)
    return io.operator_to_doc(B), _summary_op(B)


def cmd_trace(args):
    c = trace(_load_op(args.A))
    return io.celement_to_doc(c), _summary_c(c)


def cmd_det(args):
    A = _load_op(args.A)
    if args.method == "factor":
        c = determinant(A)
    elif args.method == "fredholm":
        c = determinant_fredholm(A, args.nmax)
    else:
        # the series give det(I + B); here B = A - I
        B = linear_combine(1.0, A, -1.0, identity_operator(*A.dims()))
        if args.method == "ps":
            c = det_plemelj_smithies(B, args.nmax, args.tol)
        else:
            c = det_log_series(B, args.tol)
    return io.celement_to_doc(c), _summary_c(c)


def cmd_invert(args):
    Ainv = inverse(_load_op(args.A))
    return io.operator_to_doc(Ainv), _summary_op(Ainv)


def cmd_factorize(args):
    A = _load_op(args.A)
    fac = factorize(A)
    lines = [f"factorization into {len(fac.factors)} elementary factors, residue={fac.residue:.3e}"]
    for alpha, v in fac.dets.items():
        lines.append(f"  alpha={list(alpha)}: min|pi|={np.min(np.abs(v)):.6g}")
    return io.factorization_to_doc(fac, *A.dims()), "\n".join(lines)


def cmd_spectrum(args):
    A = _load_op(args.A)
    try:
        grid = make_grid(args.re, args.im)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from None
    if args.threshold is not None and args.threshold <= 0:
        raise MalformedInput("--threshold must be positive")
    rep = spectrum_scan(A, grid, args.threshold)
    lines = [f"scanned {len(grid)} points, {len(rep.flagged)} flags"]
    for (alpha, cell), lams in rep.branches().items():
        lines.append(f"  alpha={list(alpha)} cell={list(cell)}: {len(lams)} flags in "
                     f"[{_fmt(lams[0])}, {_fmt(lams[-1])}]")
    return io.spectrum_to_doc(rep, *A.dims()), "\n".join(lines)


def cmd_oracle(args):
    A = _load_op(args.A)
    F = full_matrix(A).matrix
    D = F.shape[0]
    d = oracle_det(F)
    eig = oracle_eigenvalues(F)
    res = {}
    res["homomorphism_square"] = float(np.linalg.norm(full_matrix(compose(A, A)).matrix - F @ F, 2)
                                       / max(1.0, np.linalg.norm(F, 2) ** 2))
    rng = np.random.default_rng(0)
    u = StaircaseFunction(A.N, A.M, A.p, rng.standard_normal((A.p,) * A.N + (A.M,)))
    res["apply"] = float(np.max(np.abs(F @ u.vec() - apply(A, u).vec()))
                         / max(1.0, np.max(np.abs(u.vec()))))
    try:
        Ainv = inverse(A)
        Finv = oracle_inverse(F)
        res["inverse"] = float(np.linalg.norm(full_matrix(Ainv).matrix - Finv, 2)
                               / max(1.0, np.linalg.norm(Finv, 2)))
        prod = determinant(A).product()
        res["det_vs_pi_product"] = abs(d - prod) / max(1.0, abs(d))
    except NotInvertible:
        res["inverse"] = None
        res["det_vs_pi_product"] = None
    doc = {**io._head("oracle", *A.dims()), "D": D, "matrix": io.enc(F), "det": io.enc1(d),
           "eigenvalues": io.enc(eig), "residuals": res}
    lines = [f"oracle matrix D={D} det={_fmt(d)}"]
    lines += [f"  {k}: {'n/a (singular)' if v is None else f'{v:.3e}'}" for k, v in res.items()]
    return doc, "\n".join(lines)


def cmd_selftest(args):
    from .checks import run_suites
    which = None
    if args.suites:
        try:
            which = sorted({int(s) for s in args.suites.split(",")})
        except ValueError:
            raise MalformedInput(f"bad --suites {args.suites!r}") from None
        if not set(which) <= set(range(1, 11)):
            raise MalformedInput("suites are numbered 1..10")
    echo = None if args.json else print
    results = run_suites(which, echo=echo)
    ok = all(r.passed for r in results)
    if args.json:
        print(json.dumps([{"suite": r.suite, "name": r.name, "worst": r.worst, "tol": r.tol,
                           "n": r.n, "passed": r.passed} for r in results]))
    else:
        print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else 1


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the result document here")
    common.add_argument("--json", action="store_true", help="print the result document to stdout")

    parser = argparse.ArgumentParser(prog="mixedop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    add("info", cmd_info, "dimensions, terms and norm").add_argument("A")
    sp = add("apply", cmd_apply, "apply an operator to a function")
    sp.add_argument("--op", required=True)
    sp.add_argument("--fn", required=True)
    sp = add("compose", cmd_compose, "product A B")
    sp.add_argument("A")
    sp.add_argument("B")
    sp = add("combine", cmd_combine, "linear combination la A + mu B")
    sp.add_argument("--la", type=_complex_arg, default=1.0)
    sp.add_argument("--mu", type=_complex_arg, default=1.0)
    sp.add_argument("A")
    sp.add_argument("B")
    sp = add("refine", cmd_refine, "re-express on a q times finer grid")
    sp.add_argument("A")
    sp.add_argument("--factor", type=int, required=True)
    add("trace", cmd_trace, "vector-valued trace").add_argument("A")
    sp = add("det", cmd_det, "vector-valued determinant")
    sp.add_argument("A")
    sp.add_argument("--method", choices=["factor", "ps", "log", "fredholm"], default="factor")
    sp.add_argument("--nmax", type=int)
    sp.add_argument("--tol", type=float, default=1e-14)
    add("invert", cmd_invert, "inverse operator").add_argument("A")
    add("factorize", cmd_factorize, "ascending elementary factorization").add_argument("A")
    sp = add("spectrum", cmd_spectrum, "scan determinant components over a lambda grid")
    sp.add_argument("A")
    sp.add_argument("--re", required=True, help="start:stop:count")
    sp.add_argument("--im", help="start:stop:count")
    sp.add_argument("--threshold", type=float)
    add("oracle", cmd_oracle, "dense matrix cross-checks").add_argument("A")
    sp = add("selftest", cmd_selftest, "run the invariant suites")
    sp.add_argument("--suites", help="comma-separated suite numbers (default: all)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are malformed input
        return 3 if exc.code else 0
    try:
        out = args.func(args)
        if isinstance(out, int):
            return out
        doc, summary = out
        if args.output:
            io.write(doc, args.output)
        if args.json:
            print(io.dumps(doc))
        else:
            print(summary)
        return EXIT_OK
    except MixedOpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
