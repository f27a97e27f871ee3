"""Energy Hilbert spaces of weighted graphs: dipoles, kernels and their duals."""

from energy_space.graph_core import (
    FiniteGraph,
    GeometricChain,
    GraphError,
    GraphFunction,
    Lattice,
    WeightedGraph,
    ZChain,
    complete_graph,
    degree,
    delta_inner,
    energy_inner,
    laplacian_apply,
    make_graph,
    star_graph,
)

__all__ = [
    "FiniteGraph",
    "GeometricChain",
    "GraphError",
    "GraphFunction",
    "Lattice",
    "WeightedGraph",
    "ZChain",
    "complete_graph",
    "degree",
    "delta_inner",
    "energy_inner",
    "laplacian_apply",
    "make_graph",
    "star_graph",
]

__version__ = "0.1.0"
