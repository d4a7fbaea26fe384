import pytest

from lvg.graph import GraphError, deg_sup, loads_graph, dumps_graph, degree_field
from lvg.lattice import lattice_window


def test_single_point_window():
    g = lattice_window(1, ghost=True)
    assert len(g) == 5
    assert g.n_edges == 4
    assert g.boundary.tolist() == [False, True, True, True, True]
    assert g.neighbors(0) == [(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)]


def test_three_by_three_counts():
    g = lattice_window(3, ghost=True)
    assert (~g.boundary).sum() == 9 and g.boundary.sum() == 12
    # 12 interior-interior, 12 interior-ghost, 2 ghost-ghost per side
    assert g.n_edges == 12 + 12 + 8


def test_row_major_ids():
    g = lattice_window(4, ghost=True)
    for v in range(16):
        assert tuple(g.coords[v]) == divmod(v, 4)
    ghosts = [tuple(g.coords[v]) for v in range(16, len(g))]
    assert ghosts == sorted(ghosts)
    assert ghosts[0] == (-1, 0) and ghosts[-1] == (4, 3)


def test_interior_has_full_neighbourhood():
    g = lattice_window(5, ghost=True)
    deg = degree_field(g)
    assert all(deg[v] == 1.0 for v in range(25))
    assert deg_sup(g) == 1.0
    assert deg_sup(lattice_window(5, ghost=False)) == 1.0


def test_rejects_empty_window():
    with pytest.raises(GraphError):
        lattice_window(0)


def test_round_trip_keeps_invariants():
    g = loads_graph(dumps_graph(lattice_window(6, ghost=True)))
    assert all(m == 4.0 for m in g.mu) and all(w == 1.0 for w in g.w)
    assert sum(len(v) for v in g.adjacency.values()) == 2 * g.n_edges
