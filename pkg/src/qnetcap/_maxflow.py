"""Exact max-flow / min-cut on undirected real-weighted graphs.

Dinic's algorithm over a flat CSR arc representation, JIT-compiled with
numba (GIL released, on-disk cache).  Each undirected edge becomes two
antiparallel arcs of the same capacity that act as each other's
residual slot, which realizes the undirected cut exactly.

Real-valued capacities need no integer scaling: an arc is admissible
while its residual exceeds ``tol``, and the bottleneck arc of every
augmentation saturates to an exact floating-point zero (``x - x``), so
even ``tol = 0`` terminates: the level distance strictly grows per
phase and at least one arc saturates per augmentation step.  ``tol``
defaults to exact zero because any positive tolerance misclassifies
legitimately tiny capacities (a 700 km link is ~1e-14 ebits/use) and
would corrupt cuts near disconnection.
"""
from __future__ import annotations

import numpy as np
from numba import njit

DEFAULT_TOL = 0.0


@njit(cache=True, nogil=True)
def _fill_adjacency(eu, ev, adj_ptr, adj_arc):
    fill = adj_ptr[:-1].copy()
    for i in range(eu.size):
        u, v = eu[i], ev[i]
        adj_arc[fill[u]] = 2 * i
        fill[u] += 1
        adj_arc[fill[v]] = 2 * i + 1
        fill[v] += 1


def build_flow_csr(n_nodes: int, edges: np.ndarray, capacities: np.ndarray):
    """Static arc arrays for a graph; reused across solver calls.

    Returns ``(arc_to, arc_cap, adj_ptr, adj_arc)`` where arc ``2*i`` is
    ``u->v`` of edge ``i``, arc ``2*i + 1`` its antiparallel partner,
    and ``arc_cap`` holds the pristine capacities (callers pass a copy
    to the solver, which mutates residuals in place).
    """
    eu = np.ascontiguousarray(edges[:, 0], dtype=np.int64)
    ev = np.ascontiguousarray(edges[:, 1], dtype=np.int64)
    m = eu.size
    arc_to = np.empty(2 * m, dtype=np.int64)
    arc_to[0::2] = ev
    arc_to[1::2] = eu
    arc_cap = np.empty(2 * m, dtype=np.float64)
    arc_cap[0::2] = capacities
    arc_cap[1::2] = capacities
    deg = np.bincount(eu, minlength=n_nodes) + np.bincount(ev, minlength=n_nodes)
    adj_ptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(deg, out=adj_ptr[1:])
    adj_arc = np.empty(2 * m, dtype=np.int64)
    if m:
        _fill_adjacency(eu, ev, adj_ptr, adj_arc)
    return arc_to, arc_cap, adj_ptr, adj_arc


@njit(cache=True, nogil=True)
def dinic_max_flow(n, arc_to, residual, adj_ptr, adj_arc, s, t, tol):
    """Run Dinic to completion; mutates ``residual``; returns the flow value."""
    level = np.empty(n, dtype=np.int32)
    queue = np.empty(n, dtype=np.int64)
    arc_iter = np.empty(n, dtype=np.int64)
    stack_node = np.empty(n + 1, dtype=np.int64)
    stack_arc = np.empty(n + 1, dtype=np.int64)
    total = 0.0
    while True:
        level[:] = -1
        level[s] = 0
        queue[0] = s
        qh, qt = 0, 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for k in range(adj_ptr[u], adj_ptr[u + 1]):
                a = adj_arc[k]
                v = arc_to[a]
                if level[v] < 0 and residual[a] > tol:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[t] < 0:
            return total
        for u in range(n):
            arc_iter[u] = adj_ptr[u]
        # blocking flow: repeated DFS in the level graph
        while True:
            sp = 0
            stack_node[0] = s
            found = False
            while sp >= 0:
                u = stack_node[sp]
                if u == t:
                    found = True
                    break
                advanced = False
                while arc_iter[u] < adj_ptr[u + 1]:
                    a = adj_arc[arc_iter[u]]
                    v = arc_to[a]
                    if residual[a] > tol and level[v] == level[u] + 1:
                        stack_arc[sp] = a
                        sp += 1
                        stack_node[sp] = v
                        advanced = True
                        break
                    arc_iter[u] += 1
                if not advanced:
                    level[u] = -1
                    sp -= 1
                    if sp >= 0:
                        arc_iter[stack_node[sp]] += 1
            if not found:
                break
            bottleneck = np.inf
            for k in range(sp):
                a = stack_arc[k]
                if residual[a] < bottleneck:
                    bottleneck = residual[a]
            for k in range(sp):
                a = stack_arc[k]
                residual[a] -= bottleneck
                residual[a ^ 1] += bottleneck
            total += bottleneck


@njit(cache=True, nogil=True)
def residual_reachable(n, arc_to, residual, adj_ptr, adj_arc, s, tol):
    """Source side of the canonical min cut in the final residual graph."""
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    seen[s] = True
    queue[0] = s
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        for k in range(adj_ptr[u], adj_ptr[u + 1]):
            a = adj_arc[k]
            v = arc_to[a]
            if not seen[v] and residual[a] > tol:
                seen[v] = True
                queue[qt] = v
                qt += 1
    return seen
