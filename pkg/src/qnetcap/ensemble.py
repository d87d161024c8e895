"""Seeded ensemble experiments: sweeps, aggregation, transition fits.

A sweep walks a list of densities (or node counts), generates an
ensemble of graphs at every point, samples random end-node pairs and
records their exact end-to-end capacity, graph distance and cut
diagnostics.  Every random stream is derived from the master seed and
the (point, graph) indices, so the record stream is byte-identical no
matter how many workers execute it.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .asymptotics import (
    node_bound_er_exact,
    node_bound_scale_free,
    node_bound_waxman_exact,
    zeta_er,
    zeta_waxman,
)
from .capacity import CapacityGraph, LossParams, end_to_end_capacity
from .netgen import FAMILIES, ModelParams, generate, match_er_probability
from .seeding import derive_rng, derive_seed

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SweepPoint",
    "EnsembleRecord",
    "PointSummary",
    "DistanceBin",
    "SweepResult",
    "run_sweep",
    "bin_by_distance",
    "find_crossing",
    "fit_linear_above",
    "summarize_median",
    "write_records_csv",
    "write_summary_csv",
]

_PAIR_STREAM = 1
_BOUND_STREAM = 7001
_P_MATCH_SWEEP_STREAM = 7002

# Desk-scale ensembles keep acceptance runs in the minutes; the
# published protocol (100 graphs x 50 pairs) sits behind full_scale.
_DESK_GRAPHS, _DESK_PAIRS = 20, 20
_FULL_GRAPHS, _FULL_PAIRS = 100, 50

_DUALITY_RTOL = 1e-9


class ConfigError(ValueError):
    """Raised on malformed experiment configs, naming every bad field."""


@dataclass
class ExperimentConfig:
    """One sweep: a model family, a sweep axis, and ensemble sizes."""

    model: str
    sweep_variable: str  # "rho" | "N"
    sweep_values: list
    R_km: list | None = None
    alpha: float | None = None
    alphaL_km: float = 226.0
    gamma_per_km: float = 0.02
    m: int = 2
    p: float | None = None
    graphs_per_point: int | None = None
    pairs_per_graph: int | None = None
    full_scale: bool = False
    seed: int = 0
    bin_count: int = 20
    bound_samples: int = 400_000

    def __post_init__(self):
        problems = []
        if self.model not in FAMILIES:
            problems.append(f"model: expected one of {FAMILIES}, got {self.model!r}")
        if self.sweep_variable not in ("rho", "N"):
            problems.append(f"sweep_variable: expected 'rho' or 'N', got {self.sweep_variable!r}")
        if not self.sweep_values:
            problems.append("sweep_values: must be a non-empty list")
        else:
            vals = list(self.sweep_values)
            if any(v <= 0 for v in vals):
                problems.append("sweep_values: all values must be positive")
            if sorted(vals) != vals:
                problems.append("sweep_values: must be sorted ascending")
        if self.R_km is None and self.alpha is None:
            problems.append("R_km/alpha: one of the two must be set")
        if self.R_km is not None:
            rs = self.R_km if isinstance(self.R_km, (list, tuple)) else [self.R_km]
            if any(r <= 0 for r in rs):
                problems.append("R_km: entries must be positive")
            self.R_km = [float(r) for r in rs]
        if self.alpha is not None and self.alpha <= 0:
            problems.append("alpha: must be positive")
        if self.alphaL_km <= 0:
            problems.append("alphaL_km: must be positive")
        if self.gamma_per_km <= 0:
            problems.append("gamma_per_km: must be positive")
        if self.m < 1:
            problems.append("m: must be at least 1")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            problems.append("p: must lie in [0, 1]")
        for name in ("graphs_per_point", "pairs_per_graph"):
            v = getattr(self, name)
            if v is not None and v < 1:
                problems.append(f"{name}: must be at least 1")
        if self.bin_count < 1:
            problems.append("bin_count: must be at least 1")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        missing = [f for f in ("model", "sweep_variable", "sweep_values") if f not in doc]
        if missing:
            raise ConfigError(f"missing required config fields: {missing}")
        return cls(**doc)

    @property
    def resolved_graphs_per_point(self) -> int:
        if self.graphs_per_point is not None:
            return self.graphs_per_point
        return _FULL_GRAPHS if self.full_scale else _DESK_GRAPHS

    @property
    def resolved_pairs_per_graph(self) -> int:
        if self.pairs_per_graph is not None:
            return self.pairs_per_graph
        return _FULL_PAIRS if self.full_scale else _DESK_PAIRS

    def region_list(self) -> list:
        if self.R_km is not None:
            return list(self.R_km)
        return [self.alphaL_km / (2.0 * math.sqrt(2.0) * self.alpha)]


@dataclass(frozen=True)
class SweepPoint:
    index: int
    model: str
    n: int
    R_km: float
    rho: float
    p: float | None  # uniform link probability (ER only)


@dataclass(frozen=True)
class EnsembleRecord:
    point_index: int
    graph_index: int
    s: int
    t: int
    d_km: float  # inf when disconnected
    capacity: float
    end_ratio: float

    @property
    def connected(self) -> bool:
        return math.isfinite(self.d_km)


@dataclass(frozen=True)
class DistanceBin:
    d_km: float
    capacity: float
    count: int


@dataclass(frozen=True)
class PointSummary:
    point: SweepPoint
    mean_capacity: float
    median_capacity: float
    mean_end_ratio: float
    bound_exact: float
    bound_asymptotic: float
    bins: list = field(default_factory=list)


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    points: list
    records: list
    summaries: list

    def point_records(self, point_index: int) -> list:
        return [r for r in self.records if r.point_index == point_index]

    def curve(self, R_km: float | None = None, x: str = "rho"):
        """(x, mean capacity) pairs, optionally restricted to one region size."""
        out = []
        for s in self.summaries:
            if R_km is not None and not math.isclose(s.point.R_km, R_km):
                continue
            out.append((s.point.n if x == "N" else s.point.rho, s.mean_capacity))
        return out


@lru_cache(maxsize=8)
def _zeta_cached(alphaL_km: float, gamma_per_km: float) -> float:
    return zeta_waxman(alphaL_km=alphaL_km, gamma_per_km=gamma_per_km).value


@lru_cache(maxsize=8)
def _zeta_er_cached(gamma_per_km: float) -> float:
    return zeta_er(gamma_per_km=gamma_per_km).value


def build_points(cfg: ExperimentConfig) -> list:
    """Sweep points: the cross product of region sizes and sweep values.

    Densities are realized by rounding to a whole node count, and the
    recorded density is recomputed from it, so ``rho == n / (4 R^2)``
    holds exactly for every point.
    """
    points = []
    p_by_region = {}
    idx = 0
    for r_index, R in enumerate(cfg.region_list()):
        if cfg.model == "erdos_renyi":
            if cfg.p is not None:
                p_by_region[R] = cfg.p
            else:
                probe = ModelParams(
                    family="erdos_renyi",
                    n=2,
                    R_km=R,
                    alphaL_km=cfg.alphaL_km,
                    seed=derive_seed(cfg.seed, _P_MATCH_SWEEP_STREAM, r_index),
                )
                p_by_region[R] = match_er_probability(probe, trials=200_000).p
        for value in cfg.sweep_values:
            if cfg.sweep_variable == "N":
                n = int(round(value))
            else:
                n = int(round(value * 4.0 * R * R))
            n = max(2, n)
            if cfg.model == "scale_free":
                n = max(n, cfg.m + 1)
            points.append(
                SweepPoint(
                    index=idx,
                    model=cfg.model,
                    n=n,
                    R_km=R,
                    rho=n / (4.0 * R * R),
                    p=p_by_region.get(R),
                )
            )
            idx += 1
    return points


def _graph_task(cfg: ExperimentConfig, point: SweepPoint, graph_index: int) -> list:
    params = ModelParams(
        family=cfg.model,
        n=point.n,
        R_km=point.R_km,
        alphaL_km=cfg.alphaL_km,
        m=cfg.m,
        p=point.p,
        seed=derive_seed(cfg.seed, point.index, graph_index),
    )
    g = generate(params)
    cg = CapacityGraph(g, LossParams(cfg.gamma_per_km))
    node_caps = cg.node_capacities()

    pair_rng = derive_rng(cfg.seed, point.index, graph_index, _PAIR_STREAM)
    n_pairs = cfg.resolved_pairs_per_graph
    pairs = []
    for _ in range(n_pairs):
        s = int(pair_rng.integers(point.n))
        t = int(pair_rng.integers(point.n))
        while t == s:
            t = int(pair_rng.integers(point.n))
        pairs.append((s, t))

    dist_rows = {}
    records = []
    for pair_index, (s, t) in enumerate(pairs):
        if s not in dist_rows:
            dist_rows[s] = cg.shortest_path_lengths(s)
        d = float(dist_rows[s][t])
        cut = end_to_end_capacity(cg, s, t)
        # duality guard: the solver's flow total must equal the cut sum
        if abs(cut.flow_value - cut.value) > _DUALITY_RTOL * max(1.0, cut.value):
            raise RuntimeError(
                f"max-flow/min-cut duality violated on point {point.index} "
                f"graph {graph_index} pair ({s},{t}): "
                f"flow={cut.flow_value!r} cut={cut.value!r}"
            )
        # spot-check the node-capacity upper bound on a 1% stride
        if (graph_index * n_pairs + pair_index) % 100 == 0:
            ub = min(node_caps[s], node_caps[t])
            if cut.value > ub + 1e-9:
                raise RuntimeError(
                    f"capacity {cut.value!r} exceeds node-capacity bound {ub!r} "
                    f"on point {point.index} graph {graph_index} pair ({s},{t})"
                )
        records.append(
            EnsembleRecord(
                point_index=point.index,
                graph_index=graph_index,
                s=s,
                t=t,
                d_km=d,
                capacity=cut.value,
                end_ratio=cut.end_incident_ratio,
            )
        )
    return records


def _point_bounds(cfg: ExperimentConfig, point: SweepPoint, region_cache: dict) -> tuple:
    # the per-pair means depend only on the region, so share one
    # seeded estimate across all points at the same R
    if point.R_km not in region_cache:
        seed = derive_seed(cfg.seed, _BOUND_STREAM, len(region_cache))
        if cfg.model == "waxman":
            est = node_bound_waxman_exact(
                2, point.R_km, cfg.alphaL_km, cfg.gamma_per_km,
                samples=cfg.bound_samples, seed=seed,
            ).value
        elif cfg.model == "erdos_renyi":
            est = node_bound_er_exact(
                2, point.R_km, point.p, cfg.gamma_per_km,
                samples=cfg.bound_samples, seed=seed,
            ).value
        else:
            est = node_bound_scale_free(
                cfg.m, point.R_km, cfg.gamma_per_km,
                samples=cfg.bound_samples, seed=seed,
            ).value
        region_cache[point.R_km] = est
    per_pair = region_cache[point.R_km]
    if cfg.model == "waxman":
        exact = (point.n - 1) * per_pair
        asym = _zeta_cached(cfg.alphaL_km, cfg.gamma_per_km) * point.rho
    elif cfg.model == "erdos_renyi":
        exact = (point.n - 1) * per_pair
        asym = _zeta_er_cached(cfg.gamma_per_km) * point.p * point.rho
    else:
        exact = per_pair  # already N-independent
        asym = exact
    return exact, asym


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> SweepResult:
    """Execute a sweep; deterministic for a fixed config and seed.

    ``threads`` caps concurrent graph tasks.  Per-task sub-seeds and an
    index-ordered reduction make the output schedule-independent.
    """
    points = build_points(cfg)
    tasks = [(point, gi) for point in points for gi in range(cfg.resolved_graphs_per_point)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda pg: _graph_task(cfg, *pg), tasks))
    else:
        chunks = [_graph_task(cfg, point, gi) for point, gi in tasks]

    records = [rec for chunk in chunks for rec in chunk]

    summaries = []
    region_cache: dict = {}
    for point in points:
        recs = [r for r in records if r.point_index == point.index]
        caps = np.array([r.capacity for r in recs])
        ratios = np.array([r.end_ratio for r in recs])
        exact, asym = _point_bounds(cfg, point, region_cache)
        connected = [(r.d_km, r.capacity) for r in recs if r.connected]
        bins = []
        if len(connected) >= cfg.bin_count:
            bins = bin_by_distance(recs, cfg.bin_count)
        summaries.append(
            PointSummary(
                point=point,
                mean_capacity=float(caps.mean()),
                median_capacity=summarize_median(caps),
                mean_end_ratio=float(ratios.mean()),
                bound_exact=exact,
                bound_asymptotic=asym,
                bins=bins,
            )
        )
    return SweepResult(config=cfg, points=points, records=records, summaries=summaries)


def bin_by_distance(records, bin_count: int = 20) -> list:
    """Equal-count distance bins of the connected records.

    Records are sorted by graph distance (stable) and split into
    ``bin_count`` groups; when the count does not divide evenly the
    remainder is spread over the leading groups.  Disconnected records
    never enter bins (they carry no distance).
    """
    pts = [(r.d_km, r.capacity) for r in records if math.isfinite(r.d_km)]
    if len(pts) < bin_count:
        raise ValueError(f"need at least {bin_count} connected records, got {len(pts)}")
    pts.sort(key=lambda dc: dc[0])
    base, rem = divmod(len(pts), bin_count)
    bins = []
    start = 0
    for b in range(bin_count):
        size = base + (1 if b < rem else 0)
        group = pts[start : start + size]
        start += size
        ds = [d for d, _ in group]
        cs = [c for _, c in group]
        bins.append(DistanceBin(d_km=sum(ds) / size, capacity=sum(cs) / size, count=size))
    return bins


def find_crossing(curve, level: float = 1.0) -> float:
    """Density where a monotone-on-average curve crosses ``level``.

    ``curve`` is a sequence of ``(rho, value)`` points.  An exact hit
    returns that point's density; otherwise the first adjacent
    bracketing pair is interpolated linearly in log-log space (falling
    back to linear-in-value when a bracket endpoint is 0).
    """
    pts = sorted((float(x), float(y)) for x, y in curve)
    if len(pts) < 1:
        raise ValueError("empty curve")
    for x, y in pts:
        if y == level:
            return x
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        if (y0 - level) * (y1 - level) < 0:
            lx0, lx1 = math.log(x0), math.log(x1)
            if y0 > 0 and y1 > 0 and level > 0:
                frac = (math.log(level) - math.log(y0)) / (math.log(y1) - math.log(y0))
            else:
                frac = (level - y0) / (y1 - y0)
            return math.exp(lx0 + frac * (lx1 - lx0))
    raise ValueError(f"level {level} is not bracketed by the curve")


def fit_linear_above(curve, threshold: float = 0.1) -> tuple:
    """Least-squares line through the curve points with value above
    ``threshold``; returns ``(slope, intercept)``."""
    pts = [(x, y) for x, y in curve if y > threshold]
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points above {threshold}, got {len(pts)}")
    xs = np.array([x for x, _ in pts])
    ys = np.array([y for _, y in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(slope), float(intercept)


def summarize_median(values) -> float:
    """Exact sample median (mean of the middle two for even counts)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no values")
    return float(np.median(arr))


# ---------------------------------------------------------------------------
# CSV emission.  repr() gives shortest-round-trip floats, so reruns of
# the same config produce byte-identical files.
# ---------------------------------------------------------------------------

RECORDS_HEADER = "point_index,model,N,R_km,rho,graph_index,s,t,d_G_km,capacity,end_ratio,connected"
SUMMARY_HEADER = "point_index,model,N,R_km,rho,mean_C,median_C,mean_ratio,bound_exact,bound_asymptotic"


def _fmt(x: float) -> str:
    return repr(float(x))


def write_records_csv(result: SweepResult, path) -> None:
    by_index = {p.index: p for p in result.points}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(RECORDS_HEADER + "\n")
        for r in result.records:
            p = by_index[r.point_index]
            fh.write(
                f"{r.point_index},{p.model},{p.n},{_fmt(p.R_km)},{_fmt(p.rho)},"
                f"{r.graph_index},{r.s},{r.t},{_fmt(r.d_km)},{_fmt(r.capacity)},"
                f"{_fmt(r.end_ratio)},{'true' if r.connected else 'false'}\n"
            )


def write_summary_csv(result: SweepResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for s in result.summaries:
            p = s.point
            fh.write(
                f"{p.index},{p.model},{p.n},{_fmt(p.R_km)},{_fmt(p.rho)},"
                f"{_fmt(s.mean_capacity)},{_fmt(s.median_capacity)},{_fmt(s.mean_end_ratio)},"
                f"{_fmt(s.bound_exact)},{_fmt(s.bound_asymptotic)}\n"
            )
