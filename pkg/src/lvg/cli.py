"""Command-line interface: ``lvg <subcommand> ...``.

Exit codes: 0 success, 1 unexpected error, 2 Newton did not converge,
3 singular Jacobian, 4 bad input (format, arguments, I/O), 5 a chain-audit
check failed, 6 isoperimetric enumeration refused over the size limit.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .experiments import ExperimentSpec, energy_scan, write_records
from .graph import GraphError, VertexSet, dumps_graph, load_graph
from .isoperimetry import DEFAULT_LIMIT, EnumerationLimitError, brute_force_cis, default_jobs
from .lattice import lattice_window
from .level_sets import chain_audit
from .solver import (DEFAULT_MAX_ITER, DEFAULT_SCHEDULE, DEFAULT_TOL, DirichletProblem,
                     Nonlinearity, SingularJacobian, SolverError, continuation_solve,
                     lattice_problem_on, newton_solve, read_solution_csv, write_solution_csv)

log = logging.getLogger("lvg")

EXIT_OK = 0
EXIT_NONCONVERGENCE = 2
EXIT_SINGULAR = 3
EXIT_INPUT = 4
EXIT_AUDIT = 5
EXIT_LIMIT = 6


class InputError(Exception):
    pass


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"not a comma-separated list of numbers: {text!r}") from None


def _write(path, text):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _load(path):
    try:
        return load_graph(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _boundary_values(g, spec):
    kind, _, arg = spec.partition(":")
    if kind == "zero":
        return lattice_problem_on(g, "zero").boundary_values
    if kind == "bubble":
        vals = _floats(arg)
        if len(vals) not in (1, 3):
            raise InputError("bubble boundary is bubble:LAMBDA or bubble:LAMBDA,CX,CY")
        center = vals[1:] if len(vals) == 3 else None
        return lattice_problem_on(g, "bubble", vals[0], center).boundary_values
    if kind == "file":
        try:
            with open(arg, encoding="utf-8", newline="") as fh:
                rows = {int(r["vertex_id"]): float(r["u"]) for r in csv.DictReader(fh)}
        except OSError as exc:
            raise InputError(f"cannot read {arg}: {exc.strerror}") from None
        except (KeyError, ValueError, TypeError):
            raise InputError(f"{arg}: expected CSV columns vertex_id,u") from None
        bv = np.zeros(len(g))
        for k, v in enumerate(g.ids.tolist()):
            if g.boundary[k]:
                if v not in rows:
                    raise InputError(f"{arg}: no value for boundary vertex {v}")
                bv[k] = rows[v]
        return bv
    raise InputError(f"unknown boundary spec {spec!r}")


def cmd_gen_lattice(args):
    if args.n < 1:
        raise InputError(f"--n must be >= 1, got {args.n}")
    text = dumps_graph(lattice_window(args.n, ghost=args.ghost))
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        _write(args.output, text)
    return EXIT_OK


def cmd_solve(args):
    g = _load(args.graph)
    if g.boundary is None:
        raise InputError(f"{args.graph}: no vertices flagged as boundary")
    nonlin = {"exp": Nonlinearity.exponential, "zero": Nonlinearity.zero}[args.nonlinearity]()
    p = DirichletProblem.from_graph(g, _boundary_values(g, args.boundary), nonlin)
    out = Path(args.out)
    code = EXIT_OK
    try:
        try:
            rep = newton_solve(p, None, args.tol, args.max_iter)
        except SolverError as first:
            log.info("plain Newton failed (%s); trying continuation", first)
            rep = continuation_solve(p, DEFAULT_SCHEDULE, None, args.tol, args.max_iter)
    except SolverError as exc:
        log.error("%s", exc)
        code = EXIT_SINGULAR if isinstance(exc, SingularJacobian) else EXIT_NONCONVERGENCE
        rep = exc.report
        if rep is None:
            return code
    with _open_out(out / "solution.csv") as fh:
        write_solution_csv(g, rep.solution, fh)
    _write(out / "report.json", json.dumps(rep.to_dict(g), indent=2) + "\n")
    print(f"converged={str(rep.converged).lower()} residual_sup={rep.residual_sup!r} "
          f"iterations={rep.iterations} energy_interior={rep.energy_interior!r}")
    return code


def _open_out(path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def cmd_audit(args):
    g = _load(args.graph)
    try:
        with open(args.solution, encoding="utf-8", newline="") as fh:
            u = read_solution_csv(g, fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.solution}: {exc.strerror}") from None
    interior = None
    if g.boundary is not None:
        interior = VertexSet.from_mask(g, ~g.boundary)
    if args.sigma_min == "none":
        sigma_min = None
    elif args.sigma_min == "auto":
        sigma_min = float(u[g.boundary].max()) if interior is not None else None
    else:
        sigma_min = _floats(args.sigma_min)[0]
    if not args.cis > 0:
        raise InputError(f"--cis must be positive, got {args.cis}")
    ledger = chain_audit(g, u, args.cis, sigma_min, interior)
    out = Path(args.out)
    _write(out / "ledger.json", json.dumps(ledger.to_dict(), indent=2) + "\n")
    _write(out / "levels.csv", ledger.levels_csv())
    bad = ledger.failures()
    for c in bad:
        at = "" if c.sigma is None else f" at sigma={c.sigma!r}"
        print(f"FAIL {c.step}{at}: lhs={c.lhs!r} rhs={c.rhs!r} slack={c.slack!r}",
              file=sys.stderr)
    print(f"ok={str(not bad).lower()} checks={len(ledger.checks)} "
          f"restricted_levels={len(ledger.restricted_levels)} "
          f"final_lower_bound={ledger.final_lower_bound!r}")
    return EXIT_AUDIT if bad else EXIT_OK


def cmd_isoperimetry(args):
    g = _load(args.graph)
    if args.admissible:
        ids = [int(x) for x in _floats(args.admissible)]
        adm = VertexSet(frozenset(ids), g)
    elif g.boundary is not None:
        adm = VertexSet.from_mask(g, ~g.boundary)
    else:
        adm = None
    try:
        rep = brute_force_cis(g, adm, args.limit, jobs=default_jobs())
    except EnumerationLimitError as exc:
        log.error("%s", exc)
        return EXIT_LIMIT
    text = json.dumps(rep.to_dict()) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        _write(args.output, text)
    return EXIT_OK


def cmd_energy_scan(args):
    specs = [ExperimentSpec(int(n), tuple(_floats(args.lambdas)),
                            tuple(_floats(args.center)) if args.center else None,
                            args.tol, args.out)
             for n in _floats(args.n)]
    records = energy_scan(specs)
    path = write_records(records, args.out)
    print(f"wrote {len(records)} rows to {path}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="lvg", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-lattice", help="write an N x N window of Z^2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ghost", action="store_true", help="add the boundary ring")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_lattice)

    p = sub.add_parser("solve", help="solve the Dirichlet problem")
    p.add_argument("--graph", required=True)
    p.add_argument("--boundary", required=True,
                   help="zero | bubble:LAMBDA[,CX,CY] | file:PATH")
    p.add_argument("--nonlinearity", choices=["exp", "zero"], default="exp")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("audit", help="audit the energy-bound chain for a field")
    p.add_argument("--graph", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--cis", type=float, required=True)
    p.add_argument("--sigma-min", default="auto", help="auto | none | VALUE")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("isoperimetry", help="enumerate isoperimetric ratios")
    p.add_argument("--graph", required=True)
    p.add_argument("--admissible", help="comma-separated vertex ids")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_isoperimetry)

    p = sub.add_parser("energy-scan", help="solve and audit over (N, lambda)")
    p.add_argument("--n", required=True, help="odd window size(s), comma-separated")
    p.add_argument("--lambdas", required=True)
    p.add_argument("--center")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_energy_scan)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="lvg: %(message)s")
    try:
        return args.func(args)
    except (InputError, GraphError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
