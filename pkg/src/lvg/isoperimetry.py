"""
Isoperimetric constant by enumeration
=====================================

Upper bounds on ``C_IS = inf (w(dOmega))^2 / mu(Omega)`` from exhaustive scans
of the nonempty subsets of an admissible window. Edges leaving the window
still count toward the cut, so a window embedded in a larger host behaves
like a finite piece of that host. A scan only ever gives an upper bound for
the infimum over the host's finite subsets.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, VertexSet, boundary_weight

DEFAULT_LIMIT = 24
_CHUNK = 1 << 15


class EnumerationLimitError(GraphError):
    def __init__(self, size, limit):
        self.size, self.limit = size, limit
        super().__init__(f"admissible set has {size} vertices, over the enumeration "
                         f"limit of {limit} (2^{size} subsets)")


@dataclass(frozen=True)
class IsoperimetricReport:
    c_is_upper: float
    witness: VertexSet
    enumerated_count: int
    exhaustive: bool

    def to_dict(self):
        return {
            "c_is_upper": self.c_is_upper,
            "witness": self.witness.sorted_ids(),
            "enumerated_count": self.enumerated_count,
            "exhaustive": self.exhaustive,
        }


def iso_ratio(s):
    """``w(ds)^2 / mu(s)`` for a nonempty vertex set."""
    if len(s) == 0:
        raise GraphError("isoperimetric ratio of the empty set is undefined")
    g = s.host
    mask = s.mask
    return boundary_weight(g, mask) ** 2 / float(g.mu[mask].sum())


def square_family_scan(k_max):
    """Ratios of the k x k squares of Z^2, k = 1..k_max.

    The closed form ``(4k)^2 / (4 k^2)`` is used; for k <= 4 it is checked
    against an actual lattice window.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    from .lattice import lattice_window, square_ids

    out = []
    for k in range(1, k_max + 1):
        ratio = (4.0 * k) ** 2 / (4.0 * k * k)
        if k <= 4:
            g = lattice_window(k, ghost=True)
            built = iso_ratio(VertexSet(frozenset(square_ids(k, 0, 0, k)), g))
            if built != ratio:
                raise AssertionError(f"square k={k}: built ratio {built} != {ratio}")
        out.append((k, ratio))
    return out


def _scan_range(arrays, start, stop):
    """Minimum ratio over subset codes ``start <= code < stop``.

    Returns ``(ratio, sorted member indices)`` or None for an empty range.
    Bit ``k`` of a code selects admissible vertex ``k`` (ordered by id).
    """
    mu, e_a, e_b, e_w = arrays
    n = len(mu)
    best = None
    shifts = np.arange(n, dtype=np.uint64)
    for lo in range(start, stop, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, stop), dtype=np.uint64)
        bits = ((codes[:, None] >> shifts) & np.uint64(1)).astype(bool)
        # index n is a sentinel column for endpoints outside the window
        padded = np.concatenate([bits, np.zeros((len(codes), 1), dtype=bool)], axis=1)
        cut = padded[:, e_a] != padded[:, e_b]
        cutw = cut.astype(float) @ e_w
        meas = bits.astype(float) @ mu
        ratio = cutw * cutw / meas
        m = ratio.min()
        if best is not None and m > best[0]:
            continue
        for row in np.flatnonzero(ratio == m):
            cand = (float(m), np.flatnonzero(bits[row]).tolist())
            if best is None or cand < best:
                best = cand
    return best


def brute_force_cis(g, admissible=None, limit=DEFAULT_LIMIT, jobs=1):
    """Minimum isoperimetric ratio over all nonempty subsets of ``admissible``.

    Parameters
    ----------
    g : WeightedGraph
    admissible : VertexSet, optional
        Window to enumerate; defaults to every vertex of ``g``.
    limit : int
        Refuse windows with more vertices than this.
    jobs : int
        Number of worker processes; the code range is split into disjoint
        blocks and reduced by (ratio, smallest member list).

    Returns
    -------
    IsoperimetricReport
    """
    if admissible is None:
        admissible = VertexSet(frozenset(g.ids.tolist()), g)
    members = admissible.sorted_ids()
    n = len(members)
    if n > limit:
        raise EnumerationLimitError(n, limit)
    if n == 0:
        raise GraphError("admissible set is empty")

    pos = {g.index(v): k for k, v in enumerate(members)}
    touch = [(pos.get(a, n), pos.get(b, n), w)
             for a, b, w in zip(g.edge_a.tolist(), g.edge_b.tolist(), g.w.tolist())
             if a in pos or b in pos]
    arrays = (
        np.array([g.mu[g.index(v)] for v in members], dtype=float),
        np.array([t[0] for t in touch], dtype=np.int64),
        np.array([t[1] for t in touch], dtype=np.int64),
        np.array([t[2] for t in touch], dtype=float),
    )
    total = (1 << n) - 1
    jobs = max(1, min(int(jobs), total))
    if jobs == 1:
        results = [_scan_range(arrays, 1, total + 1)]
    else:
        bounds = np.linspace(1, total + 1, jobs + 1).astype(np.int64).tolist()
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [ex.submit(_scan_range, arrays, lo, hi)
                    for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            results = [f.result() for f in futs]
    ratio, idx = min(r for r in results if r is not None)
    witness = VertexSet(frozenset(members[k] for k in idx), g)
    return IsoperimetricReport(ratio, witness, total, True)


def default_jobs():
    try:
        return max(1, int(os.environ.get("LVG_JOBS", "1")))
    except ValueError:
        return 1
