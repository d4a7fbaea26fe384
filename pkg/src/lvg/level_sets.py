"""
Superlevel-set analysis
=======================

Computations on the superlevel sets ``Omega_s = {x : u(x) >= s}`` of a field
``u``: the cut edges ``u(x) < s <= u(y)``, the flux and ``G(s)`` sums over
them, exponential coarea integrals in closed form, the layer-cake identity,
and an audit of the whole energy lower-bound argument for a given field.

Every function of ``s`` here is a left-continuous step function that jumps
only at values of ``u``. All s-integrals are therefore evaluated exactly on
the breakpoint decomposition ``(v_{k-1}, v_k]``; numeric quadrature is only
used by the test suite as an oracle.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import VertexSet, deg_sup, integral, laplacian_field

IDENTITY_RTOL = 1e-10
SLACK_RTOL = 1e-8


def _oriented(g, u):
    """Edges with distinct endpoint values, oriented low -> high.

    Returns ``(lo_vals, hi_vals, weights, lo_idx, hi_idx)``.
    """
    u = g.field(u)
    ua, ub = u[g.edge_a], u[g.edge_b]
    keep = ua != ub
    swap = ua > ub
    lo_idx = np.where(swap, g.edge_b, g.edge_a)[keep]
    hi_idx = np.where(swap, g.edge_a, g.edge_b)[keep]
    return u[lo_idx], u[hi_idx], g.w[keep], lo_idx, hi_idx


def _cut(g, u, sigma):
    lo, hi, w, _, _ = _oriented(g, u)
    c = (lo < sigma) & (sigma <= hi)
    return lo[c], hi[c], w[c]


def superlevel_mask(u, sigma):
    return np.asarray(u) >= sigma


def superlevel_set(g, u, sigma):
    """``Omega_sigma``: vertices with ``u >= sigma`` (ties included)."""
    return VertexSet.from_mask(g, superlevel_mask(u, sigma))


def cut_edges(g, u, sigma):
    """Cut edges at level sigma as ``(x, y, w)`` id triples with u(x) < u(y)."""
    lo, hi, w, li, hj = _oriented(g, u)
    c = (lo < sigma) & (sigma <= hi)
    return [(int(g.ids[a]), int(g.ids[b]), float(wt))
            for a, b, wt in zip(li[c], hj[c], w[c])]


def flux(g, u, sigma):
    lo, hi, w = _cut(g, u, sigma)
    return float(np.sum(w * (hi - lo)))


def g_sigma(g, u, sigma):
    """``G(sigma) = sum over cut edges of w / (u(y) - u(x))``."""
    lo, hi, w = _cut(g, u, sigma)
    return float(np.sum(w / (hi - lo)))


def cut_weight(g, u, sigma):
    """Weight of the cut at sigma, which is ``w(d Omega_sigma)``."""
    _, _, w = _cut(g, u, sigma)
    return float(w.sum())


def flux_identity_check(g, u, sigma):
    """Both sides of ``-int_{Omega_s} Lap u = flux(s)``, valid for any u.

    The left side is summed from the Laplacian field; the right side from the
    cut edges.
    """
    u = np.asarray(u, dtype=float)
    mask = superlevel_mask(u, sigma)
    lhs = -float(np.dot(laplacian_field(g, u)[mask], g.mu[mask]))
    return lhs, flux(g, u, sigma)


def interior_antisymmetry(g, u, s):
    """``sum_{x in s} sum_{y in s, y~x} w_xy (u(x) - u(y))``, which is zero.

    Computed as the literal double sum over ordered pairs.
    """
    u = np.asarray(u, dtype=float)
    total = 0.0
    for x in sorted(s.members):
        k = g.index(x)
        for y, w in g.neighbors(x):
            if y in s.members:
                total += w * (u[k] - u[g.index(y)])
    return total


def _exp_secant(a, b):
    """``(e^b - e^a) / (b - a)`` for a < b, without cancellation."""
    d = b - a
    return np.exp(a) * np.expm1(d) / d


def exact_exp_coarea(g, u):
    """Closed form of ``int e^s G(s) ds`` over the real line.

    Equals ``sum over edges with u(y) > u(x) of w (e^u(y) - e^u(x)) / (u(y) - u(x))``.
    """
    lo, hi, w, _, _ = _oriented(g, np.asarray(u, dtype=float))
    return float(np.sum(w * _exp_secant(lo, hi)))


def elementary_inequality_check(a, b):
    """Whether ``(e^b - e^a) / (b - a) <= e^b`` (true for every a < b)."""
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    d = b - a
    return bool(math.expm1(d) / d <= math.exp(d))


def cauchy_schwarz_step(g, u, sigma):
    """``(G(s) * flux(s), w(d Omega_s)^2)``; the first is never smaller."""
    lo, hi, w = _cut(g, np.asarray(u, dtype=float), sigma)
    gap = hi - lo
    return float(np.sum(w / gap) * np.sum(w * gap)), float(w.sum()) ** 2


def breakpoints(u):
    return np.unique(np.asarray(u, dtype=float))


def _intervals(u):
    """Breakpoints ``v_k`` and the e^s mass ``e^{v_k} - e^{v_{k-1}}`` of each
    interval ``(v_{k-1}, v_k]``, with ``v_0 = -inf``."""
    v = breakpoints(u)
    ev = np.exp(v)
    return v, np.diff(np.concatenate([[0.0], ev]))


def layer_cake(g, u):
    """Both sides of ``int mu(Omega_s) e^s ds = int_V e^u``.

    The left side is built from the breakpoint decomposition, on which
    ``mu(Omega_s)`` is constant.
    """
    u = np.asarray(u, dtype=float)
    v, mass = _intervals(u)
    # mu(Omega_s) on (v_{k-1}, v_k] is the mass of {u >= v_k}
    order = np.searchsorted(v, u)
    per_level = np.bincount(order, weights=g.mu, minlength=len(v))
    omega_mu = np.cumsum(per_level[::-1])[::-1]
    return float(np.dot(omega_mu, mass)), integral(g, np.exp(u))


def query_levels(u):
    """Distinct values of u and the midpoints between consecutive ones."""
    v = breakpoints(u)
    return np.sort(np.concatenate([v, 0.5 * (v[:-1] + v[1:])]))


@dataclass
class LevelRecord:
    sigma: float
    omega_size: int
    mu_omega: float
    cut_count: int
    flux: float
    g_sigma: float
    cut_weight: float
    minus_int_lap: float
    energy_omega: float


@dataclass
class LevelSetProfile:
    breakpoints: np.ndarray
    records: list


def level_record(g, u, sigma, lap=None):
    u = np.asarray(u, dtype=float)
    if lap is None:
        lap = laplacian_field(g, u)
    mask = u >= sigma
    lo, hi, w = _cut(g, u, sigma)
    gap = hi - lo
    return LevelRecord(
        sigma=float(sigma),
        omega_size=int(mask.sum()),
        mu_omega=float(g.mu[mask].sum()),
        cut_count=len(w),
        flux=float(np.sum(w * gap)),
        g_sigma=float(np.sum(w / gap)),
        cut_weight=float(w.sum()),
        minus_int_lap=-float(np.dot(lap[mask], g.mu[mask])),
        energy_omega=float(np.dot(np.exp(u[mask]), g.mu[mask])),
    )


def level_set_profile(g, u, sigmas=None):
    """Per-level records at ``sigmas`` (default: :func:`query_levels`)."""
    u = np.asarray(u, dtype=float)
    if sigmas is None:
        sigmas = query_levels(u)
    lap = laplacian_field(g, u)
    return LevelSetProfile(breakpoints(u), [level_record(g, u, s, lap) for s in sigmas])


# -- chain audit -------------------------------------------------------------

@dataclass
class Check:
    """One audited relation. ``slack`` is ``larger - smaller`` for an
    inequality and ``-|lhs - rhs|`` for an identity."""

    step: str
    kind: str
    lhs: float
    rhs: float
    slack: float
    tol: float
    ok: bool
    sigma: float | None = None
    scope: str = "generic"


def _inequality(step, small, large, sigma=None, scope="generic"):
    slack = large - small
    tol = SLACK_RTOL * (1.0 + max(abs(small), abs(large)))
    return Check(step, "<=", small, large, slack, tol, slack >= -tol, sigma, scope)


def _identity(step, lhs, rhs, sigma=None, scope="generic", rtol=IDENTITY_RTOL):
    err = abs(lhs - rhs)
    tol = rtol * (1.0 + max(abs(lhs), abs(rhs)))
    return Check(step, "==", lhs, rhs, -err, tol, err <= tol, sigma, scope)


@dataclass
class ChainLedger:
    energy: float
    energy_interior: float | None
    exact_sigma_integral: float
    deg: float
    deg_bound: float
    c_is: float
    final_lower_bound: float
    sigma_min: float | None
    restricted_levels: list
    layer_cake: float
    checks: list = field(default_factory=list)
    levels: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def to_dict(self):
        d = {k: v for k, v in asdict(self).items() if k not in ("checks", "levels")}
        d["ok"] = self.ok
        d["checks"] = [asdict(c) for c in self.checks]
        d["levels"] = [asdict(r) for r in self.levels]
        return d

    def levels_csv(self):
        """CSV table ``sigma,g_sigma,flux,cut_weight,mu_omega``."""
        from ._fmt import fmt

        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["sigma", "g_sigma", "flux", "cut_weight", "mu_omega"])
        for r in self.levels:
            wr.writerow([fmt(r.sigma), fmt(r.g_sigma), fmt(r.flux),
                         fmt(r.cut_weight), fmt(r.mu_omega)])
        return buf.getvalue()


def chain_audit(g, u, c_is, sigma_min=None, interior=None):
    """Audit every step of the energy lower-bound argument for the field u.

    Parameters
    ----------
    g : WeightedGraph
    u : array
        Field on all of ``g``.
    c_is : float
        Isoperimetric constant assumed for the host (4 for Z^2).
    sigma_min : float or None
        Levels ``s >= sigma_min`` whose superlevel set lies inside
        ``interior`` are audited for the solution-dependent steps
        (``int_{Omega_s} e^u = flux`` and the isoperimetric bound). ``None``
        audits the generic steps only.
    interior : VertexSet or bool mask, optional
        Where the equation is supposed to hold; defaults to every vertex.

    Returns
    -------
    ChainLedger
    """
    if not c_is > 0:
        raise ValueError(f"c_is must be positive, got {c_is}")
    u = g.field(u)
    if interior is None:
        inside = np.ones(len(g), dtype=bool)
    elif isinstance(interior, VertexSet):
        inside = interior.mask
    else:
        inside = np.asarray(interior, dtype=bool)

    eu = np.exp(u)
    energy = integral(g, eu)
    deg = deg_sup(g)
    checks = []

    # exact coarea integral: closed form vs the breakpoint sum of G
    coarea = exact_exp_coarea(g, u)
    v, mass = _intervals(u)
    lap = laplacian_field(g, u)
    at_breaks = [level_record(g, u, s, lap) for s in v]
    g_vals = np.array([r.g_sigma for r in at_breaks])
    e_vals = np.array([r.energy_omega for r in at_breaks])
    checks.append(_identity("coarea_closed_form", coarea, float(np.dot(g_vals, mass))))

    lo, hi, w, _, _ = _oriented(g, u)
    upper_edge_sum = float(np.sum(w * np.exp(hi)))
    checks.append(_inequality("elementary_inequality", coarea, upper_edge_sum))
    checks.append(_inequality("degree_bound", upper_edge_sum, deg * energy))

    lc_lhs, lc_rhs = layer_cake(g, u)
    checks.append(_identity("layer_cake", lc_lhs, lc_rhs))

    # int e^s G(s) int_{Omega_s} e^u ds <= int_V e^u * int e^s G(s) ds
    weighted = float(np.sum(g_vals * e_vals * mass))
    checks.append(_inequality("square_int_left", weighted, energy * coarea))
    checks.append(_inequality("square_int_right", energy * coarea, deg * energy ** 2))

    levels = level_set_profile(g, u).records
    for r in levels:
        checks.append(_identity("flux_identity", r.minus_int_lap, r.flux, r.sigma))
        checks.append(_inequality("cauchy_schwarz", r.cut_weight ** 2,
                                  r.g_sigma * r.flux, r.sigma))

    restricted = []
    if sigma_min is not None:
        for r in levels:
            if r.sigma < sigma_min or r.omega_size == 0:
                continue
            if not np.all(inside[u >= r.sigma]):
                continue
            restricted.append(r.sigma)
            checks.append(_identity("flux_energy", r.energy_omega, r.flux,
                                    r.sigma, "restricted", rtol=SLACK_RTOL))
            checks.append(_inequality("isoperimetric", c_is * r.mu_omega,
                                      r.cut_weight ** 2, r.sigma, "restricted"))
        # integrated over the audited range [s0, inf): intervals (v_{k-1}, v_k]
        # with v_{k-1} >= s0 contribute in full, the first one partially
        if restricted:
            s0 = min(restricted)
            k0 = int(np.searchsorted(v, s0))
            part = mass.copy()
            part[:k0] = 0.0
            if k0 < len(v):
                part[k0] = math.exp(v[k0]) - math.exp(s0)
            mu_vals = np.array([r.mu_omega for r in at_breaks])
            checks.append(_inequality(
                "integrated_lower_bound",
                c_is * float(np.dot(mu_vals, part)),
                float(np.sum(g_vals * e_vals * part)),
                s0, "restricted"))

    return ChainLedger(
        energy=energy,
        energy_interior=float(np.dot(eu[inside], g.mu[inside])) if interior is not None else None,
        exact_sigma_integral=coarea,
        deg=deg,
        deg_bound=deg * energy,
        c_is=float(c_is),
        final_lower_bound=float(c_is) / deg if deg > 0 else math.inf,
        sigma_min=sigma_min,
        restricted_levels=restricted,
        layer_cake=lc_lhs,
        checks=checks,
        levels=levels,
    )
