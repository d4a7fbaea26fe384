"""Independent reference computations for the test suite.

These work from plain edge lists and dicts, never through the package's
vectorized paths.
"""

import itertools
import math

import numpy as np
from scipy import integrate

from lvg.graph import WeightedGraph


def random_graph(rng, n_min=2, n_max=12, lo=0.1, hi=10.0, p=None):
    n = int(rng.integers(n_min, n_max + 1))
    p = rng.uniform(0.2, 0.9) if p is None else p
    ids = rng.permutation(1000)[:n].tolist()
    mu = {v: float(rng.uniform(lo, hi)) for v in ids}
    edges = [(a, b, float(rng.uniform(lo, hi)))
             for a, b in itertools.combinations(ids, 2) if rng.random() < p]
    return WeightedGraph(mu, edges)


def random_field(rng, g, lo=-5.0, hi=5.0):
    return rng.uniform(lo, hi, len(g))


def as_dict(g, u):
    return {int(v): float(x) for v, x in zip(g.ids, u)}


def adjacency(g):
    adj = {int(v): [] for v in g.ids}
    for a, b, w in g.edges():
        adj[a].append((b, w))
        adj[b].append((a, w))
    return adj


def laplacian_at(g, u, x):
    ud = as_dict(g, u)
    mu = dict(zip(g.ids.tolist(), g.mu.tolist()))
    return sum(w * (ud[y] - ud[x]) for y, w in adjacency(g)[x]) / mu[x]


def cut_sums(g, u, sigma):
    """(G, flux, cut weight) at sigma by looping over edges."""
    ud = as_dict(g, u)
    G = fl = cw = 0.0
    for a, b, w in g.edges():
        x, y = (a, b) if ud[a] < ud[b] else (b, a)
        if ud[x] < sigma <= ud[y]:
            G += w / (ud[y] - ud[x])
            fl += w * (ud[y] - ud[x])
            cw += w
    return G, fl, cw


def coarea_quadrature(g, u):
    """Adaptive quadrature of e^s G(s) over [min u, max u]."""
    lo, hi = float(np.min(u)), float(np.max(u))
    if lo == hi:
        return 0.0
    pts = sorted(set(np.asarray(u).tolist()))[1:-1]
    val, _ = integrate.quad(lambda s: math.exp(s) * cut_sums(g, u, s)[0], lo, hi,
                            points=pts or None, limit=500, epsabs=0.0, epsrel=1e-11)
    return val


def ratio_table(g, members):
    """Isoperimetric ratio of every nonempty subset of ``members``."""
    mu = dict(zip(g.ids.tolist(), g.mu.tolist()))
    out = {}
    for r in range(1, len(members) + 1):
        for sub in itertools.combinations(sorted(members), r):
            s = set(sub)
            cut = sum(w for a, b, w in g.edges() if (a in s) != (b in s))
            out[sub] = cut * cut / sum(mu[v] for v in sub)
    return out


def bisect(f, a, b, tol=1e-15, maxit=200):
    """Plain bisection; raises if f does not change sign on [a, b]."""
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if (fa > 0) == (fb > 0):
        raise ValueError(f"no sign change on [{a}, {b}]: f(a)={fa}, f(b)={fb}")
    for _ in range(maxit):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0 or b - a < tol:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)
