"""Discrete Liouville equation ``Lap u + e^u = 0`` on weighted graphs."""

from .graph import (GraphError, GraphFormatError, VertexSet, WeightedGraph, deg_sup,
                    edge_boundary, integral, laplacian, laplacian_field, load_graph,
                    save_graph, set_measure, weighted_degree)
from .isoperimetry import IsoperimetricReport, brute_force_cis, iso_ratio, square_family_scan
from .lattice import lattice_window
from .level_sets import (ChainLedger, LevelSetProfile, cauchy_schwarz_step, chain_audit,
                         elementary_inequality_check, exact_exp_coarea, flux_identity_check,
                         g_sigma, interior_antisymmetry, layer_cake, level_set_profile,
                         superlevel_set)
from .solver import (DirichletProblem, NonConvergence, Nonlinearity, SingularJacobian,
                     SolveReport, bubble, closed_graph_obstruction, continuation_solve,
                     lattice_problem, newton_solve, residual)

__version__ = "0.1.0"
