"""Link, node and end-to-end capacities under the pure-loss law.

A fiber of length ``D`` km transmits a fraction ``eta = 10**(-gamma*D)``
of the optical signal; the ultimate two-way-assisted quantum capacity
of such a link is ``-log2(1 - eta)`` ebits per channel use.  The
end-to-end capacity between two nodes of a capacity-weighted graph is
the minimum cut separating them, computed here exactly via max flow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from . import _maxflow
from .netgen import SpatialGraph

__all__ = [
    "LossParams",
    "CutResult",
    "CapacityGraph",
    "edge_capacity",
    "edge_capacity_array",
    "node_capacity",
    "end_to_end_capacity",
    "min_cut_arrays",
    "graph_distance",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class LossParams:
    """Fiber attenuation: transmissivity decays as ``10**(-gamma*D)``."""

    gamma_per_km: float = 0.02

    def __post_init__(self):
        if self.gamma_per_km <= 0:
            raise ValueError("gamma_per_km must be positive")


def edge_capacity(distance_km: float, loss: LossParams = LossParams()) -> float:
    """Capacity of a single fiber link, in ebits per channel use.

    Strictly decreasing in the distance and positive for any
    ``distance_km > 0``; diverges as the distance tends to zero, so
    non-positive distances are rejected.
    """
    if distance_km <= 0:
        raise ValueError(f"link length must be positive, got {distance_km}")
    eta = 10.0 ** (-loss.gamma_per_km * distance_km)
    return -math.log1p(-eta) / _LN2


def edge_capacity_array(distance_km: np.ndarray, loss: LossParams = LossParams()) -> np.ndarray:
    """Vectorized :func:`edge_capacity`; inputs must be positive."""
    eta = np.power(10.0, -loss.gamma_per_km * np.asarray(distance_km, dtype=np.float64))
    return -np.log1p(-eta) / _LN2


@dataclass(frozen=True)
class CutResult:
    """One exact minimum s-t cut.

    ``value`` is the summed capacity of ``cut_edges`` (zero, with an
    empty cut, when the endpoints are disconnected).  The reported cut
    is canonical: edges leaving the source-reachable side of the final
    residual graph.  ``end_incident_ratio`` is the fraction of cut
    edges touching either endpoint (0 for an empty cut);
    ``flow_value`` is the independently accumulated max-flow total,
    kept for duality checks.
    """

    value: float
    cut_edges: np.ndarray
    end_incident_ratio: float
    source: int
    target: int
    flow_value: float
    cut_edge_indices: np.ndarray

    @property
    def connected(self) -> bool:
        return self.cut_edges.shape[0] > 0


class CapacityGraph:
    """A spatial graph weighted by the pure-loss capacity of each edge.

    Precomputes edge lengths/capacities plus the adjacency structures
    used by the flow solver and the shortest-path routines.  All query
    methods are read-only and safe to call concurrently; each solver
    invocation works on a private residual copy.
    """

    def __init__(self, graph: SpatialGraph, loss: LossParams = LossParams()):
        self.graph = graph
        self.loss = loss
        self.edge_length_km = graph.edge_lengths()
        if np.any(self.edge_length_km <= 0):
            raise ValueError("graph contains a zero-length edge")
        self.edge_cap = edge_capacity_array(self.edge_length_km, loss)
        n = graph.n_nodes
        self._flow_csr = _maxflow.build_flow_csr(n, graph.edges, self.edge_cap)
        u, v = graph.edges[:, 0], graph.edges[:, 1]
        self._length_csr = csr_matrix(
            (self.edge_length_km, (u, v)), shape=(n, n)
        )
        caps = np.zeros(n, dtype=np.float64)
        np.add.at(caps, u, self.edge_cap)
        np.add.at(caps, v, self.edge_cap)
        self._node_caps = caps

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    def node_capacities(self) -> np.ndarray:
        return self._node_caps

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.graph.n_nodes:
            raise KeyError(f"node {v} not in graph of {self.graph.n_nodes} nodes")

    def shortest_path_lengths(self, source: int) -> np.ndarray:
        """Fiber-length shortest-path distances from ``source`` to all
        nodes (inf where unreachable)."""
        self._check_node(source)
        return _sp_dijkstra(self._length_csr, directed=False, indices=source)


def node_capacity(g: CapacityGraph, v: int) -> float:
    """Sum of capacities of the edges incident to ``v`` (0 if isolated)."""
    g._check_node(v)
    return float(g._node_caps[v])


def min_cut_arrays(
    n_nodes: int,
    edges: np.ndarray,
    capacities: np.ndarray,
    s: int,
    t: int,
    tol: float = _maxflow.DEFAULT_TOL,
) -> CutResult:
    """Exact min cut on raw arrays (undirected edges with capacities)."""
    if s == t:
        raise ValueError("source and target must differ")
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    capacities = np.asarray(capacities, dtype=np.float64)
    arc_to, arc_cap, adj_ptr, adj_arc = _maxflow.build_flow_csr(n_nodes, edges, capacities)
    return _solve_cut(n_nodes, edges, capacities, arc_to, arc_cap, adj_ptr, adj_arc, s, t, tol)


def _solve_cut(n, edges, caps, arc_to, arc_cap, adj_ptr, adj_arc, s, t, tol) -> CutResult:
    residual = arc_cap.copy()
    flow = _maxflow.dinic_max_flow(n, arc_to, residual, adj_ptr, adj_arc, s, t, tol)
    reach = _maxflow.residual_reachable(n, arc_to, residual, adj_ptr, adj_arc, s, tol)
    if edges.shape[0]:
        crossing = reach[edges[:, 0]] != reach[edges[:, 1]]
        idx = np.nonzero(crossing)[0]
    else:
        idx = np.empty(0, dtype=np.int64)
    cut_edges = edges[idx]
    value = float(caps[idx].sum())
    if idx.size:
        touches = (
            (cut_edges[:, 0] == s)
            | (cut_edges[:, 1] == s)
            | (cut_edges[:, 0] == t)
            | (cut_edges[:, 1] == t)
        )
        ratio = float(np.count_nonzero(touches)) / idx.size
    else:
        ratio = 0.0
        value = 0.0
    return CutResult(
        value=value,
        cut_edges=cut_edges,
        end_incident_ratio=ratio,
        source=int(s),
        target=int(t),
        flow_value=float(flow),
        cut_edge_indices=idx,
    )


def end_to_end_capacity(g: CapacityGraph, s: int, t: int) -> CutResult:
    """Exact end-to-end capacity between ``s`` and ``t``: the minimum
    cut of the capacity-weighted graph, with the cut's edge set and
    end-incidence diagnostics."""
    g._check_node(s)
    g._check_node(t)
    if s == t:
        raise ValueError("source and target must differ")
    arc_to, arc_cap, adj_ptr, adj_arc = g._flow_csr
    return _solve_cut(
        g.graph.n_nodes,
        g.graph.edges,
        g.edge_cap,
        arc_to,
        arc_cap,
        adj_ptr,
        adj_arc,
        s,
        t,
        _maxflow.DEFAULT_TOL,
    )


def graph_distance(g: CapacityGraph, s: int, t: int) -> float:
    """Shortest fiber-path length between two nodes, in km.

    Returns ``math.inf`` when the nodes are disconnected.
    """
    g._check_node(t)
    if s == t:
        raise ValueError("source and target must differ")
    return float(g.shortest_path_lengths(s)[t])
