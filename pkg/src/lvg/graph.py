"""
Weighted graphs
===============

Finite weighted graphs ``G = (V, E, mu, w)``, the normalized graph Laplacian,
weighted degrees, vertex-set measures and edge boundaries, plus the JSON
graph file format.

Vertex ids are opaque integers. Internally every vertex also has a dense
*index* (its position in ``graph.ids``); scalar fields are plain float arrays
laid out in index order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np


class GraphError(ValueError):
    """Invalid graph data or a query outside the graph's domain."""


class GraphFormatError(GraphError):
    """Malformed graph file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


class WeightedGraph:
    """Immutable simple undirected graph with vertex measure and edge weights.

    Parameters
    ----------
    vertices : mapping id -> mu, or iterable of (id, mu)
        Vertex ids and their measures ``mu_x > 0``.
    edges : iterable of (a, b, w)
        Undirected edges with weights ``w_ab > 0``. Self-loops and duplicate
        edges (in either orientation) are rejected.
    coords : mapping id -> (i, j), optional
        Lattice coordinates, carried through file round-trips.
    boundary : iterable of ids, optional
        Vertices flagged as the Dirichlet boundary layer.
    """

    def __init__(self, vertices, edges, coords=None, boundary=None):
        items = list(vertices.items()) if isinstance(vertices, Mapping) else list(vertices)
        ids = np.array([int(v) for v, _ in items], dtype=np.int64)
        mu = np.array([float(m) for _, m in items], dtype=float)
        index = {}
        for k, v in enumerate(ids.tolist()):
            if v in index:
                raise GraphError(f"duplicate vertex id {v}")
            index[v] = k
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            bad = ids[~(np.isfinite(mu) & (mu > 0))][0]
            raise GraphError(f"vertex {bad}: mu must be positive and finite")

        ea, eb, ew = [], [], []
        seen = set()
        for a, b, w in edges:
            a, b, w = int(a), int(b), float(w)
            if a == b:
                raise GraphError(f"self-loop at vertex {a}")
            if a not in index or b not in index:
                raise GraphError(f"edge ({a}, {b}) references an unknown vertex")
            if not (math.isfinite(w) and w > 0):
                raise GraphError(f"edge ({a}, {b}): w must be positive and finite")
            ia, ib = sorted((index[a], index[b]))
            if (ia, ib) in seen:
                raise GraphError(f"duplicate edge ({a}, {b})")
            seen.add((ia, ib))
            ea.append(ia)
            eb.append(ib)
            ew.append(w)

        self.ids = _frozen(ids)
        self.mu = _frozen(mu)
        self.edge_a = _frozen(np.array(ea, dtype=np.int64))
        self.edge_b = _frozen(np.array(eb, dtype=np.int64))
        self.w = _frozen(np.array(ew, dtype=float))
        self._index = index

        n = len(ids)
        if coords is not None:
            xy = np.full((n, 2), np.nan)
            for v, (i, j) in coords.items():
                xy[self.index(v)] = (i, j)
            coords = _frozen(xy)
        self.coords = coords
        if boundary is not None:
            mask = np.zeros(n, dtype=bool)
            mask[[self.index(v) for v in boundary]] = True
            boundary = _frozen(mask)
        self.boundary = boundary

        # CSR adjacency, both orientations
        src = np.concatenate([self.edge_a, self.edge_b])
        dst = np.concatenate([self.edge_b, self.edge_a])
        wt = np.concatenate([self.w, self.w])
        order = np.lexsort((dst, src))
        self._adj_ptr = _frozen(np.searchsorted(src[order], np.arange(n + 1)))
        self._adj_idx = _frozen(dst[order])
        self._adj_w = _frozen(wt[order])

    def __len__(self):
        return len(self.ids)

    def __repr__(self):
        return f"WeightedGraph(n_vertices={len(self)}, n_edges={self.n_edges})"

    def __contains__(self, v):
        return int(v) in self._index

    @property
    def n_edges(self):
        return len(self.w)

    def index(self, v):
        """Dense index of vertex id ``v``."""
        try:
            return self._index[int(v)]
        except KeyError:
            raise GraphError(f"unknown vertex id {v}") from None

    def indices(self, vs):
        return np.array([self.index(v) for v in vs], dtype=np.int64)

    def neighbors(self, v):
        """List of ``(neighbor id, weight)`` pairs of vertex id ``v``."""
        k = self.index(v)
        lo, hi = self._adj_ptr[k], self._adj_ptr[k + 1]
        return [(int(self.ids[j]), float(wt))
                for j, wt in zip(self._adj_idx[lo:hi], self._adj_w[lo:hi])]

    @property
    def adjacency(self):
        return {int(v): self.neighbors(v) for v in self.ids}

    def edges(self):
        """Edges as ``(a, b, w)`` tuples of vertex ids."""
        return [(int(self.ids[a]), int(self.ids[b]), float(w))
                for a, b, w in zip(self.edge_a, self.edge_b, self.w)]

    def field(self, values):
        """Coerce ``values`` to a scalar field (float array in index order).

        Accepts an array of length ``len(g)`` or a mapping id -> value that
        covers every vertex. Non-finite values are rejected.
        """
        if isinstance(values, Mapping):
            u = np.empty(len(self))
            missing = set(self._index) - {int(k) for k in values}
            if missing:
                raise GraphError(f"field undefined at vertex {min(missing)}")
            for v, x in values.items():
                u[self.index(v)] = x
        else:
            u = np.asarray(values, dtype=float)
            if u.shape != (len(self),):
                raise GraphError(f"field has shape {u.shape}, expected ({len(self)},)")
        if not np.all(np.isfinite(u)):
            raise GraphError("field values must be finite")
        return u

    def laplacian_matrix(self):
        """Dense matrix ``L`` with ``(L @ u)[x] = Laplacian of u at x``."""
        n = len(self)
        L = np.zeros((n, n))
        np.add.at(L, (self.edge_a, self.edge_b), self.w)
        np.add.at(L, (self.edge_b, self.edge_a), self.w)
        L[np.diag_indices(n)] = -L.sum(axis=1)
        return L / self.mu[:, None]


@dataclass(frozen=True, eq=False)
class VertexSet:
    """A finite vertex subset ``members`` of ``host``."""

    members: frozenset
    host: WeightedGraph

    def __post_init__(self):
        members = frozenset(int(v) for v in self.members)
        for v in members:
            self.host.index(v)
        object.__setattr__(self, "members", members)

    @classmethod
    def from_mask(cls, host, mask):
        return cls(frozenset(host.ids[np.asarray(mask, dtype=bool)].tolist()), host)

    @property
    def mask(self):
        m = np.zeros(len(self.host), dtype=bool)
        if self.members:
            m[self.host.indices(self.members)] = True
        return m

    def sorted_ids(self):
        return sorted(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, v):
        return int(v) in self.members

    def __eq__(self, other):
        if isinstance(other, VertexSet):
            return self.host is other.host and self.members == other.members
        return NotImplemented

    def __hash__(self):
        return hash((id(self.host), self.members))

    def __repr__(self):
        return f"VertexSet({self.sorted_ids()})"

    def complement(self):
        return VertexSet.from_mask(self.host, ~self.mask)


# -- operators ---------------------------------------------------------------

def laplacian_field(g, u):
    """Laplacian of ``u`` at every vertex, as a field."""
    u = np.asarray(u, dtype=float)
    d = g.w * (u[g.edge_b] - u[g.edge_a])
    out = np.bincount(g.edge_a, weights=d, minlength=len(g))
    out -= np.bincount(g.edge_b, weights=d, minlength=len(g))
    return out / g.mu


def laplacian(g, u, x):
    """Laplacian of ``u`` at the single vertex id ``x``.

    Evaluates ``(1/mu_x) * sum_{y~x} w_xy (u(y) - u(x))`` directly from the
    adjacency list.
    """
    k = g.index(x)
    u = np.asarray(u, dtype=float)
    lo, hi = g._adj_ptr[k], g._adj_ptr[k + 1]
    nb = g._adj_idx[lo:hi]
    return float(np.sum(g._adj_w[lo:hi] * (u[nb] - u[k])) / g.mu[k])


def degree_field(g):
    """Weighted degree ``sum_y w_xy / mu_x`` of every vertex."""
    s = np.bincount(g.edge_a, weights=g.w, minlength=len(g))
    s += np.bincount(g.edge_b, weights=g.w, minlength=len(g))
    return s / g.mu


def weighted_degree(g, x):
    return float(degree_field(g)[g.index(x)])


def deg_sup(g):
    """``Deg(G)``: the largest weighted degree (0 for an edgeless graph)."""
    if len(g) == 0:
        return 0.0
    return float(degree_field(g).max())


def integral(g, f):
    """mu-weighted sum ``sum_x f(x) mu_x``."""
    return float(np.dot(np.asarray(f, dtype=float), g.mu))


def _cut_mask(g, mask):
    return mask[g.edge_a] != mask[g.edge_b]


def edge_boundary(s):
    """Edges with exactly one endpoint in ``s`` and their total weight.

    Returns
    -------
    edges : list of (a, b, w)
    weight : float
    """
    g = s.host
    cut = _cut_mask(g, s.mask)
    edges = [(int(g.ids[a]), int(g.ids[b]), float(w))
             for a, b, w in zip(g.edge_a[cut], g.edge_b[cut], g.w[cut])]
    return edges, float(g.w[cut].sum())


def boundary_weight(g, mask):
    return float(g.w[_cut_mask(g, mask)].sum())


def set_measure(s):
    return float(s.host.mu[s.mask].sum())


# -- file format ---------------------------------------------------------------

def graph_to_dict(g):
    verts = []
    for k, v in enumerate(g.ids.tolist()):
        rec = {"id": v, "mu": float(g.mu[k])}
        if g.coords is not None and not np.isnan(g.coords[k, 0]):
            rec["i"] = int(g.coords[k, 0])
            rec["j"] = int(g.coords[k, 1])
        if g.boundary is not None and g.boundary[k]:
            rec["boundary"] = True
        verts.append(rec)
    edges = [{"a": a, "b": b, "w": w} for a, b, w in g.edges()]
    return {"vertices": verts, "edges": edges}


def dumps_graph(g):
    """Serialize with one vertex or edge per line, so loader errors can
    point at a line."""
    d = graph_to_dict(g)
    lines = ['{"vertices": [']
    lines.append(",\n".join("  " + json.dumps(v) for v in d["vertices"]))
    lines.append('], "edges": [')
    lines.append(",\n".join("  " + json.dumps(e) for e in d["edges"]))
    lines.append("]}")
    return "\n".join(lines) + "\n"


def _skip_ws(text, pos):
    while pos < len(text) and text[pos] in " \t\r\n":
        pos += 1
    return pos


def _scan_top_level(text):
    """Decode the top-level object, recording the offset of every element of
    the ``vertices`` and ``edges`` arrays."""
    dec = json.JSONDecoder()
    out, where = {}, {}
    pos = _skip_ws(text, 0)
    if text[pos:pos + 1] != "{":
        raise json.JSONDecodeError("expected '{'", text, pos)
    pos = _skip_ws(text, pos + 1)
    if text[pos:pos + 1] == "}":
        return out, where
    while True:
        key, pos = dec.raw_decode(text, pos)
        pos = _skip_ws(text, pos)
        if text[pos:pos + 1] != ":":
            raise json.JSONDecodeError("expected ':'", text, pos)
        pos = _skip_ws(text, pos + 1)
        if key in ("vertices", "edges") and text[pos:pos + 1] == "[":
            items, offsets = [], []
            pos = _skip_ws(text, pos + 1)
            if text[pos:pos + 1] == "]":
                pos += 1
            else:
                while True:
                    offsets.append(pos)
                    item, pos = dec.raw_decode(text, pos)
                    items.append(item)
                    pos = _skip_ws(text, pos)
                    if text[pos:pos + 1] == ",":
                        pos = _skip_ws(text, pos + 1)
                        continue
                    if text[pos:pos + 1] != "]":
                        raise json.JSONDecodeError("expected ',' or ']'", text, pos)
                    pos += 1
                    break
            out[key], where[key] = items, offsets
        else:
            out[key], pos = dec.raw_decode(text, pos)
        pos = _skip_ws(text, pos)
        if text[pos:pos + 1] == ",":
            pos = _skip_ws(text, pos + 1)
            continue
        if text[pos:pos + 1] != "}":
            raise json.JSONDecodeError("expected ',' or '}'", text, pos)
        return out, where


def loads_graph(text, path=None):
    """Parse and validate a graph file.

    Every rejected entry is reported with the line it starts on.
    """
    try:
        data, where = _scan_top_level(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    for key in ("vertices", "edges"):
        if key not in data:
            raise GraphFormatError(f"missing '{key}' array", 1, path)

    def line_of(key, k):
        return text.count("\n", 0, where[key][k]) + 1

    def number(rec, field, key, k, kind=float):
        if field not in rec or isinstance(rec[field], bool) \
                or not isinstance(rec[field], (int, float)):
            raise GraphFormatError(f"{key}[{k}]: missing or non-numeric '{field}'",
                                   line_of(key, k), path)
        if kind is int and int(rec[field]) != rec[field]:
            raise GraphFormatError(f"{key}[{k}]: '{field}' must be an integer",
                                   line_of(key, k), path)
        return kind(rec[field])

    verts, coords, boundary = {}, {}, []
    for k, rec in enumerate(data["vertices"]):
        if not isinstance(rec, dict):
            raise GraphFormatError(f"vertices[{k}]: expected an object", line_of("vertices", k), path)
        v = number(rec, "id", "vertices", k, int)
        mu = number(rec, "mu", "vertices", k)
        if v in verts:
            raise GraphFormatError(f"duplicate vertex id {v}", line_of("vertices", k), path)
        if not (math.isfinite(mu) and mu > 0):
            raise GraphFormatError(f"vertex {v}: mu must be positive and finite, got {mu}",
                                   line_of("vertices", k), path)
        verts[v] = mu
        if "i" in rec and "j" in rec:
            coords[v] = (number(rec, "i", "vertices", k, int), number(rec, "j", "vertices", k, int))
        if rec.get("boundary", False):
            boundary.append(v)

    edges, seen = [], set()
    for k, rec in enumerate(data["edges"]):
        if not isinstance(rec, dict):
            raise GraphFormatError(f"edges[{k}]: expected an object", line_of("edges", k), path)
        a = number(rec, "a", "edges", k, int)
        b = number(rec, "b", "edges", k, int)
        w = number(rec, "w", "edges", k)
        line = line_of("edges", k)
        if a == b:
            raise GraphFormatError(f"self-loop at vertex {a}", line, path)
        if a not in verts or b not in verts:
            raise GraphFormatError(f"edge ({a}, {b}) references an unknown vertex", line, path)
        if not (math.isfinite(w) and w > 0):
            raise GraphFormatError(f"edge ({a}, {b}): w must be positive and finite, got {w}",
                                   line, path)
        key = (min(a, b), max(a, b))
        if key in seen:
            raise GraphFormatError(f"duplicate edge ({a}, {b})", line, path)
        seen.add(key)
        edges.append((a, b, w))

    return WeightedGraph(verts, edges,
                         coords=coords if len(coords) == len(verts) and coords else None,
                         boundary=boundary or None)


def load_graph(path):
    with open(path, encoding="utf-8") as fh:
        return loads_graph(fh.read(), path=str(path))


def save_graph(g, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_graph(g))
