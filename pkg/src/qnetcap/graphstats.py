"""Structural statistics of generated graphs.

Degree histograms with Poisson / power-law fits, connected components
and the giant fraction, and local clustering coefficients.  Everything
operates on immutable :class:`~qnetcap.netgen.SpatialGraph` objects and
is safe to call concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import stats as sp_stats
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _sp_components

from .netgen import SpatialGraph

__all__ = [
    "DegreeHistogram",
    "PoissonFit",
    "PowerLawFit",
    "ComponentStats",
    "ClusteringStats",
    "degree_histogram",
    "fit_poisson",
    "cumulative_degree",
    "fit_power_law",
    "components",
    "clustering",
]

# Above this node count the dense-matmul triangle counter would need
# O(N^2) memory; fall back to the merge-based counter (fast for the
# sparse graphs that actually occur at large N).
_DENSE_TRIANGLE_LIMIT = 4500


@dataclass(frozen=True)
class DegreeHistogram:
    """Exact degree counts: ``counts[k]`` nodes have degree ``k``."""

    counts: np.ndarray
    n_nodes: int
    mean: float
    variance: float

    @property
    def dispersion(self) -> float:
        """Variance-to-mean ratio (1 for an exact Poisson law)."""
        return self.variance / self.mean if self.mean > 0 else math.nan


@dataclass(frozen=True)
class PoissonFit:
    lam: float
    chi2: float
    dof: int
    p_value: float


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through the log-log survival function."""

    exponent: float
    intercept: float
    residual_rms: float
    k_range: tuple[int, int]


@dataclass(frozen=True)
class ComponentStats:
    sizes: np.ndarray  # descending
    giant_fraction: float

    @property
    def count(self) -> int:
        return self.sizes.size


@dataclass(frozen=True)
class ClusteringStats:
    per_node: np.ndarray
    mean: float


def degree_histogram(g: SpatialGraph) -> DegreeHistogram:
    """Degree counts plus mean and (population) variance."""
    if g.n_nodes == 0:
        raise ValueError("graph has no nodes")
    deg = g.degrees()
    counts = np.bincount(deg)
    return DegreeHistogram(
        counts=counts,
        n_nodes=g.n_nodes,
        mean=float(deg.mean()),
        variance=float(deg.var()),
    )


def fit_poisson(h: DegreeHistogram, min_expected: float = 5.0) -> PoissonFit:
    """Maximum-likelihood Poisson fit with a pooled chi-square statistic.

    ``lam`` is the sample mean; adjacent degree bins are pooled until
    each carries at least ``min_expected`` expected counts (the upper
    tail mass is folded into the last bin).
    """
    if h.n_nodes < 100:
        raise ValueError("need at least 100 nodes for a meaningful fit")
    lam = h.mean
    kmax = h.counts.size - 1
    pmf = sp_stats.poisson.pmf(np.arange(kmax + 1), lam)
    expected = h.n_nodes * pmf
    expected_tail = h.n_nodes * sp_stats.poisson.sf(kmax, lam)

    pooled_obs, pooled_exp = [], []
    acc_o, acc_e = 0.0, 0.0
    for k in range(kmax + 1):
        acc_o += h.counts[k]
        acc_e += expected[k]
        if acc_e >= min_expected:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o, acc_e = 0.0, 0.0
    # leftover low-count head plus the analytic tail
    acc_e += expected_tail
    if pooled_obs and acc_e > 0:
        pooled_obs[-1] += acc_o
        pooled_exp[-1] += acc_e
    elif acc_e > 0:
        pooled_obs.append(acc_o)
        pooled_exp.append(acc_e)

    obs = np.array(pooled_obs)
    exp = np.array(pooled_exp)
    chi2 = float(((obs - exp) ** 2 / exp).sum())
    dof = max(1, obs.size - 2)
    p_value = float(sp_stats.chi2.sf(chi2, dof))
    return PoissonFit(lam=lam, chi2=chi2, dof=dof, p_value=p_value)


def cumulative_degree(h: DegreeHistogram) -> tuple[np.ndarray, np.ndarray]:
    """Empirical survival function ``(k, P(K >= k))`` for k = 0..kmax."""
    if h.n_nodes < 1:
        raise ValueError("empty histogram")
    tail = np.cumsum(h.counts[::-1])[::-1]
    ks = np.arange(h.counts.size)
    return ks, tail / h.n_nodes


def fit_power_law(
    ks: np.ndarray,
    survival: np.ndarray,
    k_min: int = 1,
    k_max: int | None = None,
) -> PowerLawFit:
    """Least-squares slope of ``log10 P(K >= k)`` against ``log10 k``.

    The fit window defaults to ``[k_min, observed_max / 2]``, the range
    where the empirical survival of a long-tailed sample is reliable.
    The returned ``exponent`` is the magnitude of the slope, i.e.
    ``P(K >= k) ~ k**(-exponent)`` on the fitted window.
    """
    ks = np.asarray(ks)
    survival = np.asarray(survival, dtype=np.float64)
    observed_max = int(ks[survival > 0].max())
    if k_max is None:
        k_max = max(observed_max // 2, k_min + 1)
    sel = (ks >= max(k_min, 1)) & (ks <= k_max) & (survival > 0)
    if np.unique(ks[sel]).size < 3:
        raise ValueError("need at least 3 distinct degrees inside the fit window")
    x = np.log10(ks[sel].astype(np.float64))
    y = np.log10(survival[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return PowerLawFit(
        exponent=float(-slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        k_range=(int(max(k_min, 1)), int(k_max)),
    )


def components(g: SpatialGraph) -> ComponentStats:
    """Connected components; sizes sorted descending."""
    n = g.n_nodes
    if n == 0:
        raise ValueError("graph has no nodes")
    u, v = g.edges[:, 0], g.edges[:, 1]
    adj = csr_matrix((np.ones(u.size, dtype=np.int8), (u, v)), shape=(n, n))
    _, labels = _sp_components(adj, directed=False)
    sizes = np.sort(np.bincount(labels))[::-1]
    return ComponentStats(sizes=sizes, giant_fraction=float(sizes[0]) / n)


@njit(cache=True, nogil=True)
def _triangles_merge(indptr, indices, tri):
    """Per-node triangle counts via sorted-adjacency intersections."""
    n = indptr.size - 1
    for u in range(n):
        for off in range(indptr[u], indptr[u + 1]):
            v = indices[off]
            if v <= u:
                continue
            # common neighbours of u and v complete a triangle
            i, j = indptr[u], indptr[v]
            while i < indptr[u + 1] and j < indptr[v + 1]:
                a, b = indices[i], indices[j]
                if a == b:
                    tri[a] += 1
                    i += 1
                    j += 1
                elif a < b:
                    i += 1
                else:
                    j += 1


def clustering(g: SpatialGraph, method: str = "auto") -> ClusteringStats:
    """Local clustering coefficient of every node.

    ``r_c(v) = 2 t(v) / (k (k - 1))`` with ``t(v)`` the number of
    triangles through ``v``; nodes of degree < 2 contribute 0 so the
    mean remains an average over all nodes.

    ``method`` selects the triangle counter: ``dense`` (adjacency
    matmul, O(N^2) memory), ``merge`` (sorted-adjacency intersections),
    or ``auto``.
    """
    n = g.n_nodes
    if n == 0:
        raise ValueError("graph has no nodes")
    if method not in ("auto", "dense", "merge"):
        raise ValueError(f"unknown method {method!r}")
    deg = g.degrees()
    u, v = g.edges[:, 0], g.edges[:, 1]
    use_dense = method == "dense" or (method == "auto" and n <= _DENSE_TRIANGLE_LIMIT)
    if use_dense:
        adj = np.zeros((n, n), dtype=np.float32)
        adj[u, v] = 1.0
        adj[v, u] = 1.0
        paths = adj @ adj
        tri = (paths * adj).sum(axis=1, dtype=np.float64) / 2.0
    else:
        both_u = np.concatenate([u, v])
        both_v = np.concatenate([v, u])
        order = np.lexsort((both_v, both_u))
        indices = both_v[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both_u, minlength=n), out=indptr[1:])
        tri = np.zeros(n, dtype=np.int64)
        _triangles_merge(indptr, indices, tri)
        tri = tri.astype(np.float64)
    denom = deg * (deg - 1) / 2.0
    r_c = np.where(deg >= 2, tri / np.maximum(denom, 1.0), 0.0)
    return ClusteringStats(per_node=r_c, mean=float(r_c.mean()))
