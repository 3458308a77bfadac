"""``pencil`` command-line front end.

Subcommands: validate, poly, spectral, inverse, resolvent, riesz, beam.
Results go to stdout (or ``--out``) as CSV or JSON; failures print an error
JSON on stderr and exit with 2 (invalid input) or 3 (numerical failure).
Logging is controlled by PENCIL_LOG in {quiet, info, debug}.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .beamgrid import BeamProblem, discretize, refine, solve_eigen, as_pencil_report, CLAMPS
from .errors import InvalidParameter, PencilError, SchemaError
from .inverse import check_admissibility, reconstruct_pencil
from .io import (emit_plotdata, load_json, measure_from_dict, parse_poly,
                 pencil_from_dict, pencil_to_dict, special_from_dict, table_csv,
                 xi_from_dict)
from .operator import build_associated_operator, gram_matrix
from .pencil import associated_coefficients, associated_polynomials, validate
from .perturbation import (ContourSpec, build_special, resolvent_e0,
                           resolvent_residual, riesz_apply_logged)

log = logging.getLogger("jtpencil")

DEFAULT_N = 16
DEFAULT_TOL = 1e-9
DEFAULT_NODES = 256
LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _positive(kind):
    def conv(text):
        val = kind(text)
        if not val > 0:
            raise argparse.ArgumentTypeError(f"{text} must be positive")
        return val
    return conv


def _complex_pair(text: str) -> complex:
    try:
        re, im = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from exc
    return complex(re, im)


def _pairs(vec) -> list:
    return [[float(np.real(v)), float(np.imag(v))] for v in vec]


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_validate(args) -> tuple[str, int]:
    theta = pencil_from_dict(load_json(args.pencil))
    bad = validate(theta)
    report = {"valid": not bad, "violations": [str(v) for v in bad]}
    return _dumps(report), 0 if not bad else 2


def cmd_poly(args) -> tuple[str, int]:
    theta = pencil_from_dict(load_json(args.pencil))
    P = associated_coefficients(theta, args.max_degree, max(args.max_degree, 64))
    rows = [[n] + list(P[n]) for n in range(args.max_degree + 1)]
    header = ["n"] + [f"c{j}" for j in range(args.max_degree + 1)]
    return table_csv([[str(r[0])] + r[1:] for r in rows], header), 0


def cmd_spectral(args) -> tuple[str, int]:
    theta = pencil_from_dict(load_json(args.pencil))
    N = args.max_degree
    A = build_associated_operator(theta, N + 1)
    polys = associated_polynomials(theta, N, max(N, 64))
    G = gram_matrix(A, polys).real
    return table_csv(G), 0


def cmd_inverse(args) -> tuple[str, int]:
    measure = measure_from_dict(load_json(args.measure))
    op = xi_from_dict(load_json(args.xi), measure)
    report = check_admissibility(op, args.size)
    doc = {"admissibility": report.to_dict()}
    if report.passed:
        doc["pencil"] = pencil_to_dict(reconstruct_pencil(op, args.size))
    return _dumps(doc), 0 if report.passed else 2


def _special(path):
    J3, m, a, b, d, N, c = special_from_dict(load_json(path))
    return build_special(J3, m, a, b, d, N, c)[0]


def cmd_resolvent(args) -> tuple[str, int]:
    sp = _special(args.special)
    f = resolvent_e0(sp, args.z, args.size)
    doc = {"z": [args.z.real, args.z.imag], "vector": _pairs(f),
           "residual": resolvent_residual(sp, args.z, args.size)}
    return _dumps(doc), 0


def cmd_riesz(args) -> tuple[str, int]:
    sp = _special(args.special)
    u = parse_poly(args.poly)
    contour = ContourSpec.default(sp, args.nodes) if args.rho is None \
        else ContourSpec(args.rho, args.nodes)
    res = riesz_apply_logged(sp, u, contour, args.size, tol=args.tol)
    log_csv = table_csv([[str(M), d] for M, d in res.log], ["M", "delta"])
    if args.log:
        Path(args.log).write_text(log_csv)
    doc = {"vector": _pairs(res.vector), "nodes": res.nodes, "rho": contour.rho,
           "log": [[M, d] for M, d in res.log]}
    return _dumps(doc), 0


def _read_samples(path, N: int) -> np.ndarray:
    text = Path(path).read_text().split()
    vals = []
    for tok in text:
        try:
            vals.append(float(tok.split(",")[-1]))
        except ValueError:
            continue  # header line
    if len(vals) != N + 1:
        raise SchemaError(f"{path}: expected {N + 1} samples, got {len(vals)}", pointer="")
    return np.array(vals)


def cmd_beam(args) -> tuple[str, int]:
    def make(n):
        p = np.ones(n + 1) if args.p_file is None else _read_samples(args.p_file, n)
        r = np.ones(n + 1) if args.r_file is None else _read_samples(args.r_file, n)
        return BeamProblem(p, r, args.c)

    if args.refine:
        if args.p_file or args.r_file:
            raise InvalidParameter("--refine needs analytic p and r (no sample files)")
        R = refine(make, args.n, args.clamp)
        rows = [[str(n), lam, "" if k == 0 else (R.lams[k - 1] - lam)]
                for k, (n, lam) in enumerate(zip(R.sizes, R.lams))]
        text = table_csv(rows, ["N", "lambda", "delta"])
        text += f"# ratio {R.error_ratios[-1]!r} order {R.order!r}\n"
        return text, 0
    dp = discretize(make(args.n), args.clamp)
    report = as_pencil_report(dp)
    if not report.valid:
        log.warning("grid pencil report: %s", report.to_dict())
    modes = solve_eigen(dp, args.modes)
    if args.modes_file:
        table = np.column_stack([dp.nodes] + [m.vector for m in modes])
        emit_plotdata(table, args.modes_file,
                      ["x"] + [f"mode{k}" for k in range(len(modes))])
    return table_csv([[str(k), m.lam] for k, m in enumerate(modes)], ["k", "lambda"]), 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pencil", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--out", help="write the result here instead of stdout")
    ap.add_argument("--manifest", help="write the resolved options as JSON")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the pencil conditions")
    p.add_argument("--pencil", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("poly", help="associated polynomials as CSV")
    p.add_argument("--pencil", required=True)
    p.add_argument("--max-degree", type=int, default=DEFAULT_N)
    p.set_defaults(func=cmd_poly)

    p = sub.add_parser("spectral", help="Gram matrix S(p_n, p_m) as CSV")
    p.add_argument("--pencil", required=True)
    p.add_argument("--max-degree", type=int, default=DEFAULT_N)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("inverse", help="reconstruct a pencil from (measure, xi)")
    p.add_argument("--measure", required=True)
    p.add_argument("--xi", required=True)
    p.add_argument("--size", type=int, default=DEFAULT_N)
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("resolvent", help="closed-form resolvent at e0")
    p.add_argument("--special", required=True)
    p.add_argument("--z", type=_complex_pair, required=True)
    p.add_argument("--size", type=_positive(int), default=DEFAULT_N)
    p.set_defaults(func=cmd_resolvent)

    p = sub.add_parser("riesz", help="u(Ahat) e0 by contour integration")
    p.add_argument("--special", required=True)
    p.add_argument("--poly", required=True, help='coefficients "c0,c1,..."')
    p.add_argument("--nodes", type=_positive(int), default=DEFAULT_NODES)
    p.add_argument("--rho", type=_positive(float))
    p.add_argument("--size", type=_positive(int))
    p.add_argument("--tol", type=_positive(float), default=1e-8)
    p.add_argument("--log", help="convergence log CSV (M, delta)")
    p.set_defaults(func=cmd_riesz)

    p = sub.add_parser("beam", help="grid model of the beam pencil")
    p.add_argument("--n", type=int, default=80)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--p-file")
    p.add_argument("--r-file")
    p.add_argument("--modes", type=_positive(int), default=4)
    p.add_argument("--modes-file", help="CSV of mode vectors")
    p.add_argument("--clamp", choices=CLAMPS, default="reflect")
    p.add_argument("--refine", action="store_true", help="run N, 2N, 4N")
    p.set_defaults(func=cmd_beam)
    return ap


def _configure_logging():
    level = os.environ.get("PENCIL_LOG", "quiet").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def run(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    if args.manifest:
        opts = {k: (v if not isinstance(v, complex) else [v.real, v.imag])
                for k, v in sorted(vars(args).items()) if k != "func"}
        opts["tol_default"] = DEFAULT_TOL
        opts["version"] = __version__
        Path(args.manifest).write_text(_dumps(opts))
    log.info("pencil %s", args.command)
    try:
        text, status = args.func(args)
    except PencilError as exc:
        sys.stderr.write(_dumps(exc.to_dict()))
        return exc.exit_status
    except OSError as exc:
        sys.stderr.write(_dumps({"error": "io_error", "message": str(exc)}))
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


def main():
    sys.exit(run())
