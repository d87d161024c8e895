"""Random spatial network generators.

Three families of network skeletons over nodes placed uniformly at
random in the square ``[-R, R] x [-R, R]`` (all lengths in km):

* ``waxman`` — every pair is linked independently with probability
  ``exp(-D / alphaL)``, distance-decaying with a characteristic fiber
  length ``alphaL`` (226 km by default, the U.S. fiber-network value).
* ``erdos_renyi`` — every pair is linked with a uniform probability
  ``p``; node coordinates are still sampled so that link lengths (and
  hence capacities) stay distance-dependent.
* ``scale_free`` — growth model: each new node attaches to ``m``
  distinct existing nodes drawn with weight ``degree / distance``
  (preferential attachment penalized by distance).

All generators are pure functions of their parameters: the same
``ModelParams`` (including ``seed``) always produces the same graph.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .seeding import derive_rng

__all__ = [
    "GraphFormatError",
    "ModelParams",
    "SpatialGraph",
    "EdgeProbability",
    "sample_nodes",
    "generate_waxman",
    "generate_erdos_renyi",
    "generate_scale_free",
    "generate",
    "match_er_probability",
    "serialize_graph",
    "parse_graph",
    "save_graph",
    "load_graph",
]

FAMILIES = ("waxman", "erdos_renyi", "scale_free")

# Row block size for the all-pairs Bernoulli sweep; bounds peak memory
# at block * N floats per temporary.
_PAIR_BLOCK = 512

# Fixed sub-stream tag for the Monte Carlo edge-probability match, so
# it never perturbs the coordinate/edge streams.
_P_MATCH_STREAM = 901


class GraphFormatError(ValueError):
    """Raised when a graph document violates the schema or invariants."""


@dataclass(frozen=True)
class ModelParams:
    """Parameters selecting a generator family and its knobs.

    Either ``R_km`` or ``alpha`` must be given.  When only ``alpha`` is
    set, the half-width follows the fiber-length convention
    ``alpha * (2*sqrt(2)*R) = alphaL_km``, i.e. ``R = alphaL/(2√2 α)``.
    """

    family: str
    n: int
    R_km: float | None = None
    alpha: float | None = None
    alphaL_km: float = 226.0
    m: int = 2
    p: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes, got n={self.n}")
        if self.alphaL_km <= 0:
            raise ValueError("alphaL_km must be positive")
        if self.R_km is None and self.alpha is None:
            raise ValueError("one of R_km or alpha must be set")
        if self.R_km is not None and self.R_km <= 0:
            raise ValueError("R_km must be positive")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.family == "scale_free" and not 1 <= self.m < self.n:
            raise ValueError(f"scale_free needs 1 <= m < n, got m={self.m}, n={self.n}")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def half_width_km(self) -> float:
        """Region half-width R, derived from alpha when not given."""
        if self.R_km is not None:
            return self.R_km
        return self.alphaL_km / (2.0 * math.sqrt(2.0) * self.alpha)

    @property
    def rho(self) -> float:
        """Node density n / (4 R^2)."""
        R = self.half_width_km
        return self.n / (4.0 * R * R)


@dataclass(frozen=True)
class SpatialGraph:
    """Undirected spatial graph: node coordinates plus an edge list.

    ``coords`` is an (N, 2) float64 array of km positions inside the
    square of half-width ``R_km``; ``edges`` is an (E, 2) integer array
    with ``u < v`` per row, no self-loops and no duplicates.
    """

    coords: np.ndarray
    edges: np.ndarray
    R_km: float

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "edges", edges)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError("coords must have shape (N, 2)")

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def rho(self) -> float:
        return self.n_nodes / (4.0 * self.R_km * self.R_km)

    @property
    def max_span_km(self) -> float:
        """Diagonal of the region, the largest possible link length."""
        return 2.0 * math.sqrt(2.0) * self.R_km

    def edge_lengths(self) -> np.ndarray:
        """Euclidean length of every edge, in km."""
        d = self.coords[self.edges[:, 0]] - self.coords[self.edges[:, 1]]
        return np.hypot(d[:, 0], d[:, 1])

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        if self.n_edges:
            deg += np.bincount(self.edges[:, 0], minlength=self.n_nodes)
            deg += np.bincount(self.edges[:, 1], minlength=self.n_nodes)
        return deg

    def validate(self) -> None:
        """Check all structural invariants; raises GraphFormatError."""
        n = self.n_nodes
        if n == 0:
            raise GraphFormatError("graph has no nodes")
        if np.any(np.abs(self.coords) > self.R_km):
            raise GraphFormatError("node coordinates fall outside the region")
        if self.n_edges:
            u, v = self.edges[:, 0], self.edges[:, 1]
            if u.min() < 0 or v.max() >= n:
                raise GraphFormatError("edge endpoint out of range")
            if np.any(u == v):
                raise GraphFormatError("self-loop edge")
            if np.any(u > v):
                raise GraphFormatError("edges must be stored with u < v")
            key = u.astype(np.int64) * n + v
            if np.unique(key).size != key.size:
                raise GraphFormatError("duplicate edge")
            if np.any(self.edge_lengths() <= 0.0):
                raise GraphFormatError("zero-length edge (coincident endpoints)")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpatialGraph):
            return NotImplemented
        if self.R_km != other.R_km or self.n_nodes != other.n_nodes:
            return False
        if not np.array_equal(self.coords, other.coords):
            return False
        mine = {(int(u), int(v)) for u, v in self.edges}
        theirs = {(int(u), int(v)) for u, v in other.edges}
        return mine == theirs


def sample_nodes(params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Draw ``params.n`` i.i.d. uniform coordinates in the square.

    Exactly coincident rows (a probability-zero event at float64
    resolution) are resolved by resampling the later node, keeping the
    positive-distance invariant for any edge that may be drawn.
    """
    R = params.half_width_km
    coords = rng.uniform(-R, R, size=(params.n, 2))
    while True:
        _, first = np.unique(coords, axis=0, return_index=True)
        dup = np.setdiff1d(np.arange(params.n), first)
        if dup.size == 0:
            return coords
        coords[dup] = rng.uniform(-R, R, size=(dup.size, 2))


def _bernoulli_pair_edges(coords, rng, prob_of_distance=None, p_const=None):
    """All-pairs independent edge draw, blocked over rows.

    Exactly one of ``prob_of_distance`` (vectorized callable of the km
    distance) or ``p_const`` must be given.  The uniform stream is
    consumed in fixed-size row blocks so the result does not depend on
    how the work is chunked.
    """
    n = coords.shape[0]
    x, y = coords[:, 0], coords[:, 1]
    cols = np.arange(n)
    out_u, out_v = [], []
    for i0 in range(0, n, _PAIR_BLOCK):
        i1 = min(i0 + _PAIR_BLOCK, n)
        draws = rng.random((i1 - i0, n))
        if p_const is not None:
            keep = draws < p_const
        else:
            dx = x[i0:i1, None] - x[None, :]
            dy = y[i0:i1, None] - y[None, :]
            d = np.sqrt(dx * dx + dy * dy)
            keep = draws < prob_of_distance(d)
        keep &= cols[None, :] > np.arange(i0, i1)[:, None]
        ii, jj = np.nonzero(keep)
        out_u.append((ii + i0).astype(np.int64))
        out_v.append(jj.astype(np.int64))
    u = np.concatenate(out_u) if out_u else np.empty(0, dtype=np.int64)
    v = np.concatenate(out_v) if out_v else np.empty(0, dtype=np.int64)
    return np.column_stack([u, v])


def generate_waxman(params: ModelParams, coords: np.ndarray | None = None) -> SpatialGraph:
    """Generate a Waxman graph: link probability ``exp(-D/alphaL)``.

    Parameters
    ----------
    params : ModelParams
        Must have ``family='waxman'``.
    coords : ndarray, optional
        Fixed (N, 2) node layout; when omitted, nodes are sampled
        uniformly from the region using the params seed.
    """
    if params.family != "waxman":
        raise ValueError("params.family must be 'waxman'")
    rng = derive_rng(params.seed)
    if coords is None:
        coords = sample_nodes(params, rng)
    else:
        coords = np.asarray(coords, dtype=np.float64)
    alphaL = params.alphaL_km
    edges = _bernoulli_pair_edges(
        coords, rng, prob_of_distance=lambda d: np.exp(-d / alphaL)
    )
    return SpatialGraph(coords=coords, edges=edges, R_km=params.half_width_km)


def generate_erdos_renyi(params: ModelParams, coords: np.ndarray | None = None) -> SpatialGraph:
    """Generate an Erdős–Rényi graph with uniform link probability.

    ``params.p`` may be left unset, in which case it is matched to the
    expected Waxman edge count for the same region via
    :func:`match_er_probability` (its Monte Carlo stream is independent
    of the coordinate/edge streams).
    """
    if params.family != "erdos_renyi":
        raise ValueError("params.family must be 'erdos_renyi'")
    p = params.p
    if p is None:
        p = match_er_probability(params).p
    rng = derive_rng(params.seed)
    if coords is None:
        coords = sample_nodes(params, rng)
    else:
        coords = np.asarray(coords, dtype=np.float64)
    edges = _bernoulli_pair_edges(coords, rng, p_const=p)
    return SpatialGraph(coords=coords, edges=edges, R_km=params.half_width_km)


def generate_scale_free(params: ModelParams, coords: np.ndarray | None = None) -> SpatialGraph:
    """Generate a distance-penalized preferential-attachment graph.

    The first ``m + 1`` nodes form a complete seed clique; every later
    node attaches to exactly ``m`` distinct earlier nodes, drawn one by
    one without replacement with weight ``degree(candidate) /
    distance(new, candidate)``.  The edge count is therefore exactly
    ``m*n - m*(m+1)/2`` for every seed.
    """
    if params.family != "scale_free":
        raise ValueError("params.family must be 'scale_free'")
    n, m = params.n, params.m
    rng = derive_rng(params.seed)
    if coords is None:
        coords = sample_nodes(params, rng)
    else:
        coords = np.asarray(coords, dtype=np.float64)
    x, y = coords[:, 0], coords[:, 1]

    n_edges = m * n - m * (m + 1) // 2
    eu = np.empty(n_edges, dtype=np.int64)
    ev = np.empty(n_edges, dtype=np.int64)
    deg = np.zeros(n, dtype=np.float64)
    k = 0
    for i in range(m + 1):
        for j in range(i + 1, m + 1):
            eu[k], ev[k] = i, j
            k += 1
    deg[: m + 1] = m

    chosen = np.empty(m, dtype=np.int64)
    for t in range(m + 1, n):
        dx = x[:t] - x[t]
        dy = y[:t] - y[t]
        w = deg[:t] / np.sqrt(dx * dx + dy * dy)
        for j in range(m):
            c = np.cumsum(w)
            r = rng.random() * c[-1]
            idx = int(np.searchsorted(c, r, side="right"))
            if idx >= t:  # guard against r landing exactly on the total
                idx = t - 1
            chosen[j] = idx
            w[idx] = 0.0
        for idx in chosen:
            eu[k], ev[k] = idx, t
            k += 1
            deg[idx] += 1.0
        deg[t] = m

    edges = np.column_stack([eu, ev])
    return SpatialGraph(coords=coords, edges=edges, R_km=params.half_width_km)


def generate(params: ModelParams, coords: np.ndarray | None = None) -> SpatialGraph:
    """Dispatch to the generator selected by ``params.family``."""
    if params.family == "waxman":
        return generate_waxman(params, coords)
    if params.family == "erdos_renyi":
        return generate_erdos_renyi(params, coords)
    return generate_scale_free(params, coords)


@dataclass(frozen=True)
class EdgeProbability:
    """Monte Carlo estimate of the mean pair-connection probability."""

    p: float
    std_error: float
    trials: int


def match_er_probability(params: ModelParams, trials: int = 100_000) -> EdgeProbability:
    """Estimate the uniform probability matching Waxman edge counts.

    Returns the seeded Monte Carlo estimate of ``E[exp(-D/alphaL)]``
    over independent uniform point pairs in the region, with its
    standard error.  Dedicated sub-stream of ``params.seed``, so
    estimates are reproducible and do not disturb graph generation.
    """
    if trials < 10_000:
        raise ValueError("need at least 10^4 trials for a stable match")
    rng = derive_rng(params.seed, _P_MATCH_STREAM)
    R = params.half_width_km
    a = rng.uniform(-R, R, size=(trials, 2))
    b = rng.uniform(-R, R, size=(trials, 2))
    d = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])
    vals = np.exp(-d / params.alphaL_km)
    p = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials))
    return EdgeProbability(p=p, std_error=se, trials=trials)


# ---------------------------------------------------------------------------
# JSON graph documents
# ---------------------------------------------------------------------------

def serialize_graph(g: SpatialGraph) -> str:
    """Render the graph as a JSON document (full float precision).

    Edge lengths and capacities are intentionally not stored; they are
    recomputed from coordinates on load.
    """
    doc = {
        "R_km": g.R_km,
        "nodes": [
            {"id": i, "x_km": float(g.coords[i, 0]), "y_km": float(g.coords[i, 1])}
            for i in range(g.n_nodes)
        ],
        "edges": [{"u": int(u), "v": int(v)} for u, v in g.edges],
    }
    return json.dumps(doc)


def parse_graph(document: str | dict) -> SpatialGraph:
    """Parse and validate a JSON graph document.

    Raises ``GraphFormatError`` naming the offending field (or carrying
    the JSON decoder's line/column) on any schema or invariant breach.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"not valid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise GraphFormatError("top-level value must be an object")
    for key in ("R_km", "nodes", "edges"):
        if key not in doc:
            raise GraphFormatError(f"missing required field {key!r}")
    try:
        R = float(doc["R_km"])
    except (TypeError, ValueError) as exc:
        raise GraphFormatError("R_km must be a number") from exc
    if R <= 0:
        raise GraphFormatError("R_km must be positive")

    nodes = doc["nodes"]
    if not isinstance(nodes, list) or not nodes:
        raise GraphFormatError("nodes must be a non-empty list")
    n = len(nodes)
    coords = np.empty((n, 2), dtype=np.float64)
    seen = np.zeros(n, dtype=bool)
    for rank, entry in enumerate(nodes):
        try:
            i = int(entry["id"])
            coords_i = (float(entry["x_km"]), float(entry["y_km"]))
        except (TypeError, KeyError, ValueError) as exc:
            raise GraphFormatError(f"nodes[{rank}]: expected id/x_km/y_km fields") from exc
        if not 0 <= i < n:
            raise GraphFormatError(f"nodes[{rank}]: id {i} not in [0, {n})")
        if seen[i]:
            raise GraphFormatError(f"nodes[{rank}]: duplicate id {i}")
        seen[i] = True
        coords[i] = coords_i

    raw_edges = doc["edges"]
    if not isinstance(raw_edges, list):
        raise GraphFormatError("edges must be a list")
    edges = np.empty((len(raw_edges), 2), dtype=np.int64)
    for rank, entry in enumerate(raw_edges):
        try:
            u, v = int(entry["u"]), int(entry["v"])
        except (TypeError, KeyError, ValueError) as exc:
            raise GraphFormatError(f"edges[{rank}]: expected u/v fields") from exc
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edges[{rank}]: endpoint out of range")
        if u == v:
            raise GraphFormatError(f"edges[{rank}]: self-loop at node {u}")
        edges[rank] = (u, v) if u < v else (v, u)

    g = SpatialGraph(coords=coords, edges=edges, R_km=R)
    try:
        g.validate()
    except GraphFormatError as exc:
        raise GraphFormatError(f"invalid graph document: {exc}") from exc
    return g


def save_graph(g: SpatialGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_graph(g))


def load_graph(path) -> SpatialGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())
