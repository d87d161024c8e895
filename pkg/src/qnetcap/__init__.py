"""Capacity analysis of random spatial quantum networks.

Generators for Waxman / Erdős–Rényi / scale-free network skeletons,
exact end-to-end (min-cut) capacities under the bosonic pure-loss law,
structural statistics, analytic bounds, and seeded ensemble sweeps.
"""
from .capacity import (
    CapacityGraph,
    CutResult,
    LossParams,
    edge_capacity,
    edge_capacity_array,
    end_to_end_capacity,
    graph_distance,
    min_cut_arrays,
    node_capacity,
)
from .netgen import (
    ModelParams,
    SpatialGraph,
    generate,
    generate_erdos_renyi,
    generate_scale_free,
    generate_waxman,
    load_graph,
    match_er_probability,
    parse_graph,
    sample_nodes,
    save_graph,
    serialize_graph,
)
from .seeding import derive_rng, derive_seed

__version__ = "0.1.0"
