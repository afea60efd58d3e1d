"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import boundary, gram, multiplicity, oracle
from .errors import (
    InconsistentResidual,
    OPAError,
    PrecisionExhausted,
    SingularMatrix,
)
from .linalg import backend_from_env, parse_backend
from .polynomials import ZeroSet, from_zeros, parse_complex_list
from .weights import PowerWeight, WeightSequence, full_kernel, kernel_partial_sum

log = logging.getLogger("opa")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (PrecisionExhausted, SingularMatrix, InconsistentResidual, OverflowError, ZeroDivisionError)
VERIFY_DEFAULT_BACKEND = "ext:60"
VERIFY_RTOL = 1e-8


class UsageError(Exception):
    pass


def _alpha(text: str):
    try:
        return Fraction(text) if "/" in text else float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid alpha {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    w = p.add_mutually_exclusive_group()
    w.add_argument("--alpha", type=_alpha, default=None, help="power weight exponent: omega_k = (k+1)^alpha (default 0)")
    w.add_argument("--weights-csv", type=Path, default=None, help="custom weight table (one 'omega' column)")
    p.add_argument("--backend", default=None, help="f64, ext:<digits> or rational (default: $OPA_BACKEND, else automatic)")
    p.add_argument("--out", type=Path, default=None, help="write the result here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _zeros_or_mult(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--zeros", help='zeros of f as "re,im;re,im;..."')
    g.add_argument("--mult", type=int, help="use f = (z-1)^d with this multiplicity d")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="opa", description="Optimal polynomial approximants in weighted Hardy spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", parents=[common], help="solve for p_n and the residual 1 - p_n f")
    _zeros_or_mult(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--leading", type=complex, default=1)

    p = sub.add_parser("sweep", parents=[common], help="sup / Wiener norm / distance over a range of n")
    _zeros_or_mult(p)
    p.add_argument("--n", required=True, help='"a..b" or "a..b:step"')
    p.add_argument("--compact", default="disc:1", help='e.g. "point:0", "disc:0.9", "arc:0:0.5", joined with "+"')
    p.add_argument("--exclusion", type=float, default=boundary.DEFAULT_EXCLUSION)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("verify", parents=[common], help="randomized comparison against the least-squares oracle")
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--d-max", type=int, default=6)
    p.add_argument("--rtol", type=float, default=VERIFY_RTOL)

    p = sub.add_parser("asymptotics", parents=[common], help="normalized A_1 against its limit constant")
    p.add_argument("--mult", type=int, required=True)
    p.add_argument("--n-max", type=int, default=2000)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--tolerance", type=float, default=None)

    p = sub.add_parser("kernel", parents=[common], help="evaluate the (truncated) reproducing kernel")
    p.add_argument("--z", required=True, help='"re,im"')
    p.add_argument("--w", required=True, help='"re,im"')
    k = p.add_mutually_exclusive_group(required=True)
    k.add_argument("--m", type=int, help="truncation index")
    k.add_argument("--full", action="store_true", help="full kernel (|z w| < 1)")
    p.add_argument("--tol", type=float, default=1e-12)
    return parser


# --------------------------------------------------------------------------


def _weight(args) -> WeightSequence:
    if args.weights_csv is not None:
        return WeightSequence.from_csv(args.weights_csv)
    return PowerWeight(0 if args.alpha is None else args.alpha)


def _backend(args, default=None):
    if args.backend is not None:
        return parse_backend(args.backend)
    return backend_from_env(default)


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        args.out.write_text(text if text.endswith("\n") else text + "\n")


def _one_complex(text: str) -> complex:
    vals = parse_complex_list(text)
    if len(vals) != 1:
        raise UsageError(f"expected a single complex number, got {text!r}")
    return vals[0]


def _solution_csv(sol) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "residual_re", "residual_im", "pn_re", "pn_im"])
    r = [complex(c) for c in sol.residual_array()]
    p = [complex(c) for c in sol.pn_array()]
    for k in range(len(r)):
        c = p[k] if k < len(p) else 0j
        w.writerow([k, repr(r[k].real), repr(r[k].imag), repr(c.real), repr(c.imag)])
    return buf.getvalue()


def cmd_approx(args) -> int:
    omega = _weight(args)
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    b = _backend(args)
    if args.mult is not None:
        if args.mult < 1:
            raise UsageError("--mult must be >= 1")
        sol = multiplicity.multiplicity_approximant(omega, args.mult, args.n, b)
    else:
        zs = ZeroSet.parse(args.zeros)
        sol = gram.optimal_approximant(omega, zs, args.n, args.leading, b)
    text = _solution_csv(sol) if args.format == "csv" else sol.to_json()
    _emit(args, text)
    summary = (
        f"distance_sq={sol.distance_sq_float!r} wiener={boundary.wiener_norm(sol)!r} "
        f"residual_degree={len(sol.residual_coeffs) - 1} backend={sol.backend}"
    )
    print(summary, file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_sweep(args) -> int:
    omega = _weight(args)
    ns = boundary.parse_n_range(args.n)
    K = boundary.parse_compact(args.compact)
    if args.mult is not None:
        if args.mult < 1:
            raise UsageError("--mult must be >= 1")
        K = K.avoiding_zeros([1], args.exclusion)
        report = boundary.rate_sweep(omega, None, "unit", ns, K, _backend(args), multiplicity_d=args.mult,
                                     workers=args.workers)
    else:
        zs = ZeroSet.parse(args.zeros)
        K = K.avoiding_zeros(zs, args.exclusion)
        report = boundary.rate_sweep(omega, zs, "unit", ns, K, _backend(args), workers=args.workers)
    _emit(args, report.to_json() if args.format == "json" else report.to_csv())
    return EXIT_OK


def random_instance(rng: np.random.Generator, d_max: int, n_max: int, alphas) -> dict:
    """Zeros in the annulus ``0.3 <= |z| <= 3`` (uniform in area), pairwise at least 0.05 apart."""
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(0, n_max + 1))
    alpha = alphas[int(rng.integers(0, len(alphas)))]
    zs: list[complex] = []
    while len(zs) < d:
        r = float(np.sqrt(rng.uniform(0.09, 9.0)))
        t = float(rng.uniform(0.0, 2 * np.pi))
        z = complex(r * np.cos(t), r * np.sin(t))
        if all(abs(z - w) > 0.05 for w in zs):
            zs.append(z)
    return {"alpha": alpha, "n": n, "zeros": [[z.real, z.imag] for z in zs]}


def compare_instance(inst: dict, backend) -> float:
    """Max coefficient difference between the Gram and oracle residuals, relative to the largest coefficient."""
    omega = PowerWeight(inst["alpha"])
    zs = [complex(a, b) for a, b in inst["zeros"]]
    b = parse_backend(backend)
    g = gram.optimal_approximant(omega, zs, inst["n"], backend=b)
    # expand f in the working precision so both routes solve the same problem
    o = oracle.oracle_solve(omega, from_zeros([b.scalar(z) for z in zs]), inst["n"], backend=b)
    rg, ro = g.residual_array(), o.residual_array()
    scale = float(np.max(np.abs(ro)))
    return float(np.max(np.abs(rg - ro))) / scale if scale else float(np.max(np.abs(rg)))


def cmd_verify(args) -> int:
    if args.cases <= 0:
        raise UsageError("--cases must be positive")
    if args.n_max < 0 or args.d_max < 1:
        raise UsageError("--n-max must be >= 0 and --d-max >= 1")
    b = _backend(args, VERIFY_DEFAULT_BACKEND)
    alphas = [-1, 0, 1] if args.alpha is None else [args.alpha]
    rng = np.random.default_rng(args.seed)
    worst, worst_inst, failures = 0.0, None, []
    for i in range(args.cases):
        inst = random_instance(rng, args.d_max, args.n_max, alphas)
        try:
            err = compare_instance(inst, b)
        except NUMERIC_ERRORS as exc:
            print(json.dumps({"case": i, "instance": inst, "error": str(exc)}, sort_keys=True), file=sys.stderr)
            print(f"numerical failure in case {i} with backend {b}: {exc}; "
                  "retry with a wider backend, e.g. --backend ext:80", file=sys.stderr)
            return EXIT_NUMERIC
        if err > worst:
            worst, worst_inst = err, inst
        if not err <= args.rtol:
            failures.append({"case": i, "instance": inst, "rel_error": err})
    report = {
        "backend": str(b),
        "cases": args.cases,
        "failures": failures,
        "passed": not failures,
        "rtol": args.rtol,
        "seed": args.seed,
        "worst_instance": worst_inst,
        "worst_rel_error": worst,
    }
    if args.format == "csv":
        text = f"cases,failures,worst_rel_error\n{args.cases},{len(failures)},{worst!r}\n"
    else:
        text = json.dumps(report, sort_keys=True)
    _emit(args, text)
    print(f"{args.cases} cases, {len(failures)} failures, worst relative error {worst:.3e}", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_FAIL


def cmd_asymptotics(args) -> int:
    if args.weights_csv is not None:
        raise UsageError("asymptotics needs a power weight (--alpha)")
    alpha = 0 if args.alpha is None else args.alpha
    table = multiplicity.asymptotic_check(alpha, args.mult, args.n_max, _backend(args), args.points, args.tolerance)
    _emit(args, table.to_json() if args.format == "json" else table.to_csv())
    verdict = "within" if table.passed else "outside"
    print(f"final ratio {table.final_ratio:.6g} vs limit {table.limit:.6g}: {verdict} {table.tolerance:.0%}",
          file=sys.stderr)
    return EXIT_OK if table.passed else EXIT_FAIL


def cmd_kernel(args) -> int:
    omega = _weight(args)
    z, w = _one_complex(args.z), _one_complex(args.w)
    b = _backend(args) or parse_backend("f64")
    if args.full:
        value = full_kernel(omega, z, w, args.tol, b)
        m = None
    else:
        if args.m < 0:
            raise UsageError("--m must be >= 0")
        value = kernel_partial_sum(omega, args.m, z, w, b)
        m = args.m
    v = complex(value)
    if args.format == "csv":
        text = f"z_re,z_im,w_re,w_im,m,value_re,value_im\n{z.real!r},{z.imag!r},{w.real!r},{w.imag!r},{'' if m is None else m},{v.real!r},{v.imag!r}\n"
    else:
        text = json.dumps({"m": m, "value": [v.real, v.imag], "w": [w.real, w.imag], "z": [z.real, z.imag]},
                          sort_keys=True)
    _emit(args, text)
    return EXIT_OK


COMMANDS = {
    "approx": cmd_approx,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "asymptotics": cmd_asymptotics,
    "kernel": cmd_kernel,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, OPAError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
