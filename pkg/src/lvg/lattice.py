"""Finite windows of the lattice Z^2 with mu = 4 and w = 1.

Id scheme (row-major): the N x N interior point ``(i, j)``, ``0 <= i, j < N``,
gets id ``i * N + j``. When the ghost ring is requested, the 4N points of
Z^2 adjacent to the interior (corners excluded) follow with ids ``N*N, ...``
in row-major order of ``(i, j)`` over ``-1 <= i, j <= N``. The window is the
subgraph of Z^2 induced on these points, so ghost points on the same side
are joined to each other.
"""

from __future__ import annotations

from .graph import GraphError, WeightedGraph

LATTICE_MU = 4.0
LATTICE_W = 1.0


def lattice_points(n, ghost=True):
    """Return ``(interior, ring)`` coordinate lists in id order."""
    if n < 1:
        raise GraphError(f"window size must be >= 1, got {n}")
    interior = [(i, j) for i in range(n) for j in range(n)]
    ring = []
    if ghost:
        for i in range(-1, n + 1):
            for j in range(-1, n + 1):
                inside_i, inside_j = 0 <= i < n, 0 <= j < n
                if inside_i != inside_j:
                    ring.append((i, j))
    return interior, ring


def lattice_window(n, ghost=True):
    """N x N window of Z^2, optionally with its ghost ring flagged as boundary."""
    interior, ring = lattice_points(n, ghost)
    pts = interior + ring
    ids = {p: k for k, p in enumerate(pts)}
    edges = []
    for (i, j), k in ids.items():
        for q in ((i + 1, j), (i, j + 1)):
            if q in ids:
                edges.append((k, ids[q], LATTICE_W))
    return WeightedGraph(
        {k: LATTICE_MU for k in range(len(pts))},
        edges,
        coords={k: p for p, k in ids.items()},
        boundary=range(len(interior), len(pts)) if ghost else None,
    )


def square_ids(n, top, left, k):
    """Ids of the k x k interior square with upper-left corner ``(top, left)``."""
    return [(top + a) * n + (left + b) for a in range(k) for b in range(k)]
