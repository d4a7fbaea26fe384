"""Energy scans of bubble-boundary Dirichlet problems on Z^2 windows."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from ._fmt import fmt
from .level_sets import chain_audit
from .solver import DEFAULT_TOL, SolverError, bubble, lattice_problem, solve

ZZ2_CIS = 4.0


@dataclass(frozen=True)
class ExperimentSpec:
    window_size: int
    lambda_grid: tuple
    center: tuple | None = None
    tolerance: float = DEFAULT_TOL
    output_dir: str = "."

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window size must be odd and >= 3, got {self.window_size}")
        lams = tuple(float(x) for x in self.lambda_grid)
        if not lams or any(not x > 0 for x in lams):
            raise ValueError("lambda grid must be nonempty and positive")
        object.__setattr__(self, "lambda_grid", lams)
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass
class EnergyRecord:
    N: int
    lam: float
    converged: bool
    energy_interior: float | None
    riemann_reference: float
    residual_sup: float | None
    iterations: int | None
    sigma_min_used: float
    audited_levels: int
    audited_chain_ok: bool
    final_lower_bound: float
    error: str = ""


COLUMNS = [f.name for f in fields(EnergyRecord)]


def riemann_reference(n, lam, center=None):
    """``4 * sum of exp(bubble)`` over the N x N interior (mu = 4 per point)."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    pts = np.stack([i, j], axis=-1).reshape(-1, 2)
    x0 = ((n - 1) / 2.0,) * 2 if center is None else center
    return float(4.0 * np.exp(bubble(pts, x0, lam)).sum())


def run_cell(n, lam, center=None, tol=DEFAULT_TOL):
    """Solve one (N, lambda) cell and audit the chain above the boundary."""
    p = lattice_problem(n, "bubble", lam, center)
    b = ~p.interior_mask
    sigma_min = float(p.boundary_values[b].max())
    ref = riemann_reference(n, lam, center)
    try:
        rep = solve(p, tol=tol)
    except SolverError as exc:
        return EnergyRecord(n, lam, False, None, ref, None, None, sigma_min, 0, False,
                            ZZ2_CIS, str(exc))
    ledger = chain_audit(p.graph, rep.solution, ZZ2_CIS, sigma_min, p.interior)
    return EnergyRecord(n, lam, True, rep.energy_interior, ref, rep.residual_sup,
                        rep.iterations, sigma_min, len(ledger.restricted_levels),
                        ledger.ok, ledger.final_lower_bound)


def _cell(args):
    return run_cell(*args)


def energy_scan(specs, jobs=None):
    """Run every (N, lambda) cell; rows come back sorted by (N, lambda)."""
    if isinstance(specs, ExperimentSpec):
        specs = [specs]
    cells = sorted({(s.window_size, lam, s.center, s.tolerance)
                    for s in specs for lam in s.lambda_grid},
                   key=lambda c: (c[0], c[1]))
    if jobs is None:
        jobs = int(os.environ.get("LVG_JOBS", "1") or 1)
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as ex:
            return list(ex.map(_cell, cells))
    return [_cell(c) for c in cells]


def records_csv(records):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(COLUMNS)
    for r in records:
        row = []
        for name, val in asdict(r).items():
            if isinstance(val, bool):
                row.append("true" if val else "false")
            elif isinstance(val, float):
                row.append(fmt(val))
            elif val is None:
                row.append("")
            else:
                row.append(val)
        wr.writerow(row)
    return buf.getvalue()


def write_records(records, output_dir, name="energy_scan.csv"):
    path = Path(output_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(records_csv(records), encoding="utf-8")
    return path
