"""
Dirichlet solver for Lap u + F(u) = 0
=====================================

The equation is imposed at interior vertices, and boundary vertices carry
prescribed values. Interior values are the only unknowns. Each Newton step
factors the dense Jacobian ``L_II + diag(F'(u_I))`` by LU with partial
pivoting, then backtracks by halving until the Euclidean residual norm
drops.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .graph import GraphError, VertexSet, integral, laplacian_field

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50
MAX_HALVINGS = 30
PIVOT_RTOL = 1e-14
DEFAULT_SCHEDULE = (0.25, 0.5, 0.75, 1.0)
_VALIDATION_GRID = np.linspace(-20.0, 5.0, 101)


class SolverError(RuntimeError):
    """Base class; ``last_iterate`` holds the full field when the failure
    happened."""

    def __init__(self, message, last_iterate=None, report=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.report = report
        self.t = None


class SingularJacobian(SolverError):
    pass


class NonConvergence(SolverError):
    pass


@dataclass(frozen=True)
class Nonlinearity:
    """The source term F and its derivative, optionally scaled by ``scale``."""

    kind: str
    eval: Callable
    deriv: Callable
    name: str = "exp"
    scale: float = 1.0

    @classmethod
    def exponential(cls):
        return cls("Exponential", np.exp, np.exp, "exp")

    @classmethod
    def convex_custom(cls, f, df, *, nondecreasing, convex, name="custom"):
        """A user-supplied F declared nonnegative, nondecreasing and convex.

        The declarations are spot-checked on 101 points of [-20, 5]; an F that
        visibly violates them is rejected. Passing the check is no proof.
        """
        if not (nondecreasing and convex):
            raise ValueError("F must be declared nondecreasing and convex")
        x = _VALIDATION_GRID
        with np.errstate(all="ignore"):
            fx = np.asarray(f(x), dtype=float) * np.ones_like(x)
            dfx = np.asarray(df(x), dtype=float) * np.ones_like(x)
        if not (np.all(np.isfinite(fx)) and np.all(np.isfinite(dfx))):
            raise ValueError(f"{name}: F or F' not finite on the validation grid")
        scale = 1.0 + np.abs(fx).max()
        if np.any(fx < -1e-12 * scale):
            raise ValueError(f"{name}: F takes negative values")
        if np.any(dfx < -1e-12 * (1.0 + np.abs(dfx).max())):
            raise ValueError(f"{name}: F' takes negative values")
        slopes = np.diff(fx) / np.diff(x)
        if np.any(np.diff(slopes) < -1e-9 * (1.0 + np.abs(slopes).max())):
            raise ValueError(f"{name}: secant slopes decrease, F is not convex")
        return cls("ConvexCustom", f, df, name)

    @classmethod
    def zero(cls):
        return cls.convex_custom(np.zeros_like, np.zeros_like,
                                 nondecreasing=True, convex=True, name="zero")

    def __call__(self, u):
        return self.scale * self.eval(u)

    def d(self, u):
        return self.scale * self.deriv(u)

    def scaled(self, t):
        return Nonlinearity(self.kind, self.eval, self.deriv, self.name, self.scale * t)


def bubble(x, x0, lam):
    """Planar Liouville bubble ``ln(32 lam^2 / (4 + lam^2 |x - x0|^2)^2)``.

    ``x`` may be a single point or an array of points (last axis of size 2).
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    d = np.asarray(x, dtype=float) - np.asarray(x0, dtype=float)
    r2 = np.sum(d * d, axis=-1)
    out = math.log(32.0 * lam * lam) - 2.0 * np.log(4.0 + lam * lam * r2)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(eq=False)
class DirichletProblem:
    graph: object
    interior: VertexSet
    boundary_values: np.ndarray
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity.exponential)

    def __post_init__(self):
        g = self.graph
        if self.interior.host is not g:
            raise GraphError("interior set belongs to a different graph")
        self.interior_mask = self.interior.mask
        self.boundary = self.interior.complement()
        bv = np.zeros(len(g))
        if isinstance(self.boundary_values, dict):
            for v, x in self.boundary_values.items():
                bv[g.index(v)] = x
            missing = [v for v in self.boundary.members if v not in self.boundary_values]
            if missing:
                raise GraphError(f"no boundary value for vertex {min(missing)}")
        else:
            bv = np.array(self.boundary_values, dtype=float)
            if bv.shape != (len(g),):
                raise GraphError(f"boundary values have shape {bv.shape}, expected ({len(g)},)")
        bv[self.interior_mask] = 0.0
        if not np.all(np.isfinite(bv)):
            raise GraphError("boundary values must be finite")
        self.boundary_values = bv
        self._L = None

    @classmethod
    def from_graph(cls, g, boundary_values, nonlinearity=None):
        """Use the graph's boundary flags to split interior from boundary."""
        if g.boundary is None or not g.boundary.any():
            raise GraphError("graph has no vertices flagged as boundary")
        interior = VertexSet.from_mask(g, ~g.boundary)
        return cls(g, interior, boundary_values, nonlinearity or Nonlinearity.exponential())

    def with_nonlinearity(self, nonlinearity):
        return DirichletProblem(self.graph, self.interior, self.boundary_values, nonlinearity)

    @property
    def laplacian(self):
        if self._L is None:
            g = self.graph
            n = len(g)
            rows = np.concatenate([g.edge_a, g.edge_b])
            cols = np.concatenate([g.edge_b, g.edge_a])
            w = np.concatenate([g.w, g.w])
            A = sp.csr_matrix((w, (rows, cols)), shape=(n, n))
            deg = np.asarray(A.sum(axis=1)).ravel()
            self._L = sp.diags(1.0 / g.mu) @ (A - sp.diags(deg))
            self._L = self._L.tocsr()
        return self._L

    def embed(self, interior_values):
        u = self.boundary_values.copy()
        u[self.interior_mask] = interior_values
        return u

    def check_boundary(self, u):
        b = ~self.interior_mask
        if not np.array_equal(u[b], self.boundary_values[b]):
            bad = self.graph.ids[b][u[b] != self.boundary_values[b]][0]
            raise GraphError(f"field disagrees with the boundary data at vertex {bad}")


@dataclass
class SolveReport:
    solution: np.ndarray
    residual_sup: float
    iterations: int
    damping_events: int
    continuation_steps: list
    energy_interior: float
    converged: bool
    residual_history: list = field(default_factory=list)

    def to_dict(self, graph=None):
        d = asdict(self)
        d["solution"] = self.solution.tolist() if graph is None else {
            int(v): float(x) for v, x in zip(graph.ids, self.solution)}
        d["energy_convention"] = "sum of mu*exp(u) over interior vertices only"
        return d


def residual(p, u):
    """``Lap u + F(u)`` at interior vertices, zero on the boundary."""
    u = p.graph.field(u)
    p.check_boundary(u)
    return _residual(p, u)


def _residual(p, u):
    r = np.zeros(len(p.graph))
    m = p.interior_mask
    with np.errstate(over="ignore", invalid="ignore"):
        r[m] = (p.laplacian @ u)[m] + p.nonlinearity(u[m])
    return r


def jacobian(p, u):
    """Dense Jacobian of the interior residual w.r.t. interior values."""
    m = p.interior_mask
    J = p.laplacian[m][:, m].toarray()
    J[np.diag_indices_from(J)] += p.nonlinearity.d(u[m])
    return J


def _lu_solve(J, rhs, u):
    if J.size == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(J)):
        raise SingularJacobian("Jacobian has non-finite entries", u)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(J, check_finite=False)
    pivots = np.abs(np.diag(lu))
    scale = np.abs(J).max()
    if pivots.min() <= PIVOT_RTOL * scale:
        k = int(pivots.argmin())
        raise SingularJacobian(
            f"pivot {k} is {pivots[k]:.3e}, below {PIVOT_RTOL:g} x {scale:.3e}", u)
    return sla.lu_solve((lu, piv), rhs, check_finite=False)


def harmonic_extension(p):
    """Field equal to the boundary data with ``Lap u = 0`` inside."""
    m = p.interior_mask
    L = p.laplacian
    rhs = -(L[m][:, ~m] @ p.boundary_values[~m])
    return p.embed(_lu_solve(L[m][:, m].toarray(), rhs, p.boundary_values))


def _energy_interior(p, u):
    m = p.interior_mask
    return float(np.dot(np.exp(u[m]), p.graph.mu[m]))


def newton_solve(p, initial=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Damped Newton iteration for the interior unknowns.

    Parameters
    ----------
    p : DirichletProblem
    initial : array, optional
        Starting field, equal to the boundary data on the boundary. The
        harmonic extension is used when omitted.
    tol : float
        Stop once the sup-norm residual is at most ``tol``.
    max_iter : int
        Newton steps allowed before giving up.

    Returns
    -------
    SolveReport

    Raises
    ------
    SingularJacobian
        A pivot fell below ``1e-14`` times the largest Jacobian entry.
    NonConvergence
        ``max_iter`` steps were taken, or 30 halvings failed to reduce the
        residual norm.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if initial is None:
        u = harmonic_extension(p)
    else:
        u = p.graph.field(initial).copy()
        p.check_boundary(u)
    m = p.interior_mask
    damping = 0
    history = []

    def report(u, r, it, ok):
        return SolveReport(u, float(np.abs(r).max(initial=0.0)), it, damping, [],
                           _energy_interior(p, u), ok, history)

    r = _residual(p, u)
    for it in range(max_iter + 1):
        rsup = float(np.abs(r).max(initial=0.0))
        history.append(rsup)
        if rsup <= tol:
            return report(u, r, it, True)
        if it == max_iter:
            break
        try:
            step = _lu_solve(jacobian(p, u), -r[m], u)
        except SingularJacobian as exc:
            exc.report = report(u, r, it, False)
            raise
        rnorm = np.linalg.norm(r)
        s = 1.0
        for h in range(MAX_HALVINGS + 1):
            trial = u.copy()
            trial[m] += s * step
            rt = _residual(p, trial)
            if np.linalg.norm(rt) < rnorm:
                break
            s *= 0.5
        else:
            raise NonConvergence(
                f"line search failed after {MAX_HALVINGS} halvings at iteration {it}, "
                f"residual {rsup:.3e}", u, report(u, r, it, False))
        if h > 0:
            damping += 1
        u, r = trial, rt
    raise NonConvergence(f"no convergence in {max_iter} iterations, residual {rsup:.3e}",
                         u, report(u, r, max_iter, False))


def continuation_solve(p, t_schedule, initial=None, tol=DEFAULT_TOL,
                       max_iter=DEFAULT_MAX_ITER):
    """Solve with ``t * F`` for each t of an increasing schedule ending at 1,
    warm-starting each stage from the previous solution."""
    ts = [float(t) for t in t_schedule]
    if not ts:
        raise ValueError("continuation schedule is empty")
    if any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])) or ts[-1] != 1.0:
        raise ValueError(f"schedule must be positive, increasing and end at 1: {ts}")
    u = initial
    iterations = damping = 0
    history = []
    for t in ts:
        try:
            rep = newton_solve(p.with_nonlinearity(p.nonlinearity.scaled(t)), u, tol, max_iter)
        except SolverError as exc:
            exc.t = t
            exc.args = (f"at t={t}: {exc.args[0]}",)
            raise
        u = rep.solution
        iterations += rep.iterations
        damping += rep.damping_events
        history.extend(rep.residual_history)
    rep.iterations, rep.damping_events = iterations, damping
    rep.continuation_steps = ts
    rep.residual_history = history
    return rep


def solve(p, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, schedule=DEFAULT_SCHEDULE):
    """Plain Newton from the harmonic extension, then continuation if that fails."""
    try:
        return newton_solve(p, None, tol, max_iter)
    except SolverError:
        return continuation_solve(p, schedule, None, tol, max_iter)


def closed_graph_obstruction(g, u):
    """``(sum_x mu_x Lap u(x), sum_x mu_x e^u(x))`` on a finite graph.

    The first is always zero and the second positive, so ``Lap u + e^u``
    cannot vanish everywhere. Averaging gives
    ``sup |Lap u + e^u| >= sum mu e^u / sum mu``.
    """
    u = g.field(u)
    return integral(g, laplacian_field(g, u)), integral(g, np.exp(u))


def full_residual(g, u, nonlinearity=None):
    """``Lap u + F(u)`` at every vertex, with no boundary exemption."""
    F = nonlinearity or Nonlinearity.exponential()
    u = g.field(u)
    return laplacian_field(g, u) + F(u)


# -- lattice helpers and file formats -------------------------------------------

def lattice_problem(n, boundary="bubble", lam=0.5, center=None, nonlinearity=None):
    """Dirichlet problem on the N x N window of Z^2 with its ghost ring.

    ``boundary`` is ``"zero"`` or ``"bubble"``; the bubble is centered at
    ``center`` (default: the window center) in ``(i, j)`` coordinates.
    """
    from .lattice import lattice_window

    g = lattice_window(n, ghost=True)
    return lattice_problem_on(g, boundary, lam, center, nonlinearity)


def lattice_problem_on(g, boundary="bubble", lam=0.5, center=None, nonlinearity=None):
    if boundary == "zero":
        bv = np.zeros(len(g))
    elif boundary == "bubble":
        if g.coords is None:
            raise GraphError("bubble boundary data needs vertex coordinates")
        if center is None:
            inner = g.coords[~g.boundary]
            center = (inner.min(axis=0) + inner.max(axis=0)) / 2.0
        bv = np.where(g.boundary, bubble(g.coords, center, lam), 0.0)
    else:
        raise ValueError(f"unknown boundary kind {boundary!r}")
    return DirichletProblem.from_graph(g, bv, nonlinearity)


def write_solution_csv(g, u, fh):
    """Columns ``vertex_id,i,j,u``; i and j are blank without coordinates."""
    from ._fmt import fmt

    wr = csv.writer(fh, lineterminator="\n")
    wr.writerow(["vertex_id", "i", "j", "u"])
    for k, v in enumerate(g.ids.tolist()):
        if g.coords is not None and not np.isnan(g.coords[k, 0]):
            i, j = int(g.coords[k, 0]), int(g.coords[k, 1])
        else:
            i = j = ""
        wr.writerow([v, i, j, fmt(u[k])])


def read_solution_csv(g, fh):
    rd = csv.DictReader(fh)
    if rd.fieldnames is None or "vertex_id" not in rd.fieldnames or "u" not in rd.fieldnames:
        raise GraphError("solution CSV needs 'vertex_id' and 'u' columns")
    vals = {}
    for row in rd:
        vals[int(row["vertex_id"])] = float(row["u"])
    return g.field(vals)
