import itertools
import math

import numpy as np
import pytest

from qnetcap.capacity import (
    CapacityGraph,
    LossParams,
    edge_capacity,
    edge_capacity_array,
    end_to_end_capacity,
    graph_distance,
    min_cut_arrays,
    node_capacity,
)
from qnetcap.netgen import SpatialGraph

from conftest import (
    brute_force_min_cut,
    enumerate_shortest_path,
    random_geometric_instance,
)

GAMMA = 0.02


def spatial(coords, edges, R=1000.0):
    return SpatialGraph(
        coords=np.asarray(coords, dtype=np.float64),
        edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        R_km=R,
    )


def distance_for_capacity(c):
    """Invert the pure-loss law: the length whose capacity is c."""
    return -math.log10(1.0 - 2.0 ** (-c)) / GAMMA


def circle_intersection(p0, r0, p1, r1, sign=1.0):
    """One intersection point of two circles (must intersect)."""
    p0, p1 = np.asarray(p0), np.asarray(p1)
    d = float(np.hypot(*(p1 - p0)))
    a = (r0**2 - r1**2 + d**2) / (2 * d)
    h = math.sqrt(r0**2 - a**2)
    mid = p0 + a * (p1 - p0) / d
    perp = np.array([-(p1 - p0)[1], (p1 - p0)[0]]) / d
    return mid + sign * h * perp


# --- edge capacity ----------------------------------------------------------

def test_edge_capacity_fifty_km():
    # eta = 0.1 at 50 km: capacity = -log2(0.9)
    assert edge_capacity(50.0) == pytest.approx(0.15200309344504997, rel=1e-12)


def test_edge_capacity_unit_distance():
    # eta = 1/2 exactly at D = log10(2)/gamma
    d = math.log10(2.0) / GAMMA
    assert d == pytest.approx(15.0515, abs=1e-4)
    assert edge_capacity(d) == pytest.approx(1.0, abs=1e-12)


def test_edge_capacity_rejects_nonpositive():
    with pytest.raises(ValueError):
        edge_capacity(0.0)
    with pytest.raises(ValueError):
        edge_capacity(-3.0)


def test_edge_capacity_strictly_decreasing_and_positive():
    d = np.geomspace(0.01, 5000, 300)
    c = edge_capacity_array(d)
    assert np.all(c > 0)
    assert np.all(np.diff(c) < 0)


# --- node capacity ----------------------------------------------------------

def test_node_capacity_isolated_and_leaf():
    g = spatial([[0, 0], [50, 0], [200, 200]], [[0, 1]])
    cg = CapacityGraph(g)
    assert node_capacity(cg, 2) == 0.0
    assert node_capacity(cg, 1) == pytest.approx(edge_capacity(50.0), rel=1e-12)


def test_node_capacity_star():
    leaves = [[50, 0], [0, 50], [-50, 0]]
    g = spatial([[0, 0]] + leaves, [[0, 1], [0, 2], [0, 3]])
    cg = CapacityGraph(g)
    assert node_capacity(cg, 0) == pytest.approx(3 * 0.15200309344504997, rel=1e-10)


def test_node_capacity_unknown_node():
    g = spatial([[0, 0], [50, 0]], [[0, 1]])
    with pytest.raises(KeyError):
        node_capacity(CapacityGraph(g), 7)


# --- end-to-end capacity ----------------------------------------------------

def test_single_edge_cut():
    g = spatial([[0, 0], [80, 0]], [[0, 1]])
    cut = end_to_end_capacity(CapacityGraph(g), 0, 1)
    assert cut.value == pytest.approx(edge_capacity(80.0), rel=1e-12)
    assert cut.end_incident_ratio == 1.0
    assert cut.connected


def test_disconnected_pair():
    g = spatial([[0, 0], [50, 0], [500, 500], [560, 500]], [[0, 1], [2, 3]])
    cut = end_to_end_capacity(CapacityGraph(g), 0, 2)
    assert cut.value == 0.0
    assert cut.cut_edges.shape[0] == 0
    assert cut.end_incident_ratio == 0.0
    assert not cut.connected


def test_same_node_rejected():
    g = spatial([[0, 0], [50, 0]], [[0, 1]])
    with pytest.raises(ValueError):
        end_to_end_capacity(CapacityGraph(g), 1, 1)


def test_four_node_instance_from_the_figure():
    # Embed four nodes so the link capacities come out as 1.9, 1.2,
    # 0.8 (internal) and 1.75, 0.93 (the two edges into the target):
    # the minimum cut is then the target's edge set, 1.75+0.93 = 2.68.
    caps = {"x1x3": 1.9, "x1x4": 1.2, "x3x4": 0.8, "x3x2": 1.75, "x4x2": 0.93}
    d = {k: distance_for_capacity(c) for k, c in caps.items()}
    x1 = np.array([0.0, 0.0])
    x3 = np.array([d["x1x3"], 0.0])
    x4 = circle_intersection(x1, d["x1x4"], x3, d["x3x4"], sign=1.0)
    x2 = circle_intersection(x3, d["x3x2"], x4, d["x4x2"], sign=1.0)
    g = spatial([x1, x2, x3, x4], [[0, 2], [0, 3], [2, 3], [1, 2], [1, 3]], R=100.0)
    cg = CapacityGraph(g)
    assert cg.edge_cap == pytest.approx(
        [caps["x1x3"], caps["x1x4"], caps["x3x4"], caps["x3x2"], caps["x4x2"]], rel=1e-9
    )
    cut = end_to_end_capacity(cg, 0, 1)
    assert cut.value == pytest.approx(2.68, abs=1e-9)
    assert cut.end_incident_ratio == 1.0  # both cut edges touch the target
    assert {tuple(e) for e in cut.cut_edges} == {(1, 2), (1, 3)}
    oracle = brute_force_min_cut(4, g.edges.tolist(), cg.edge_cap, 0, 1)
    assert cut.value == pytest.approx(oracle, rel=1e-12)


def test_brute_force_equivalence_200_instances(rng):
    checked = 0
    for _ in range(200):
        n, coords, edges = random_geometric_instance(rng)
        g = spatial(coords, edges, R=120.0)
        cg = CapacityGraph(g)
        s, t = rng.choice(n, size=2, replace=False)
        s, t = int(s), int(t)
        cut = end_to_end_capacity(cg, s, t)
        oracle = brute_force_min_cut(n, [tuple(e) for e in edges], cg.edge_cap, s, t)
        assert cut.value == pytest.approx(oracle, rel=1e-9, abs=1e-12)
        # duality: accumulated flow equals the reported cut capacity
        assert cut.flow_value == pytest.approx(cut.value, rel=1e-9, abs=1e-12)
        # symmetry
        assert end_to_end_capacity(cg, t, s).value == pytest.approx(cut.value, rel=1e-9, abs=1e-12)
        checked += 1
    assert checked == 200


def test_cut_upper_bounded_by_node_capacities(rng):
    for _ in range(40):
        n, coords, edges = random_geometric_instance(rng, n_max=12)
        g = spatial(coords, edges, R=120.0)
        cg = CapacityGraph(g)
        s, t = rng.choice(n, size=2, replace=False)
        cut = end_to_end_capacity(cg, int(s), int(t))
        bound = min(node_capacity(cg, int(s)), node_capacity(cg, int(t)))
        assert cut.value <= bound + 1e-9


def test_removing_cut_edges_disconnects(rng):
    for _ in range(30):
        n, coords, edges = random_geometric_instance(rng, n_max=10)
        g = spatial(coords, edges, R=120.0)
        cg = CapacityGraph(g)
        s, t = rng.choice(n, size=2, replace=False)
        cut = end_to_end_capacity(cg, int(s), int(t))
        if not cut.connected:
            continue
        removed = {tuple(e) for e in cut.cut_edges}
        kept = [tuple(e) for e in edges if tuple(e) not in removed]
        assert enumerate_shortest_path(
            n, kept, [1.0] * len(kept), int(s), int(t)
        ) == math.inf


def test_adding_edge_never_decreases_capacity(rng):
    for _ in range(25):
        n = int(rng.integers(4, 31))
        coords = rng.uniform(-100, 100, size=(n, 2))
        all_pairs = list(itertools.combinations(range(n), 2))
        present = [p for p in all_pairs if rng.random() < 0.25]
        absent = [p for p in all_pairs if p not in set(present)]
        if not present or not absent:
            continue
        s, t = rng.choice(n, size=2, replace=False)
        s, t = int(s), int(t)
        g = spatial(coords, present, R=120.0)
        before = end_to_end_capacity(CapacityGraph(g), s, t).value
        extra = absent[int(rng.integers(len(absent)))]
        g2 = spatial(coords, present + [extra], R=120.0)
        after = end_to_end_capacity(CapacityGraph(g2), s, t).value
        assert after >= before - 1e-12


def test_min_cut_arrays_explicit_capacities():
    # raw-array entry point: unit square with a diagonal
    edges = [(0, 1), (1, 2), (2, 3), (0, 3), (1, 3)]
    caps = [3.0, 1.0, 2.5, 2.0, 0.5]
    cut = min_cut_arrays(4, edges, caps, 0, 2)
    oracle = brute_force_min_cut(4, edges, caps, 0, 2)
    assert cut.value == pytest.approx(oracle, rel=1e-12)


# --- graph distance ---------------------------------------------------------

def test_distance_adjacent_equals_euclidean():
    g = spatial([[0, 0], [30, 40]], [[0, 1]])
    assert graph_distance(CapacityGraph(g), 0, 1) == pytest.approx(50.0, rel=1e-12)


def test_distance_path_additivity():
    g = spatial([[0, 0], [10, 0], [30, 0]], [[0, 1], [1, 2]])
    assert graph_distance(CapacityGraph(g), 0, 2) == pytest.approx(30.0, rel=1e-12)


def test_distance_prefers_shorter_route():
    # detour A-B-C is 20 km; once the 12 km direct link exists it wins
    a, c = [0.0, 0.0], [12.0, 0.0]
    b = circle_intersection(np.array(a), 10.0, np.array(c), 10.0)
    g_detour = spatial([a, b, c], [[0, 1], [1, 2]])
    assert graph_distance(CapacityGraph(g_detour), 0, 2) == pytest.approx(20.0, rel=1e-12)
    g_direct = spatial([a, b, c], [[0, 1], [1, 2], [0, 2]])
    assert graph_distance(CapacityGraph(g_direct), 0, 2) == pytest.approx(12.0, rel=1e-12)


def test_distance_disconnected_is_inf():
    g = spatial([[0, 0], [50, 0], [500, 500]], [[0, 1]])
    assert graph_distance(CapacityGraph(g), 0, 2) == math.inf


def test_distance_symmetric_and_matches_enumeration(rng):
    for _ in range(30):
        n, coords, edges = random_geometric_instance(rng, n_max=9, edge_prob=0.4)
        g = spatial(coords, edges, R=120.0)
        cg = CapacityGraph(g)
        lengths = g.edge_lengths()
        s, t = rng.choice(n, size=2, replace=False)
        s, t = int(s), int(t)
        d = graph_distance(cg, s, t)
        oracle = enumerate_shortest_path(n, [tuple(e) for e in edges], lengths, s, t)
        if math.isinf(oracle):
            assert math.isinf(d)
        else:
            assert d == pytest.approx(oracle, rel=1e-12)
        assert graph_distance(cg, t, s) == pytest.approx(d, rel=1e-12) or (
            math.isinf(d) and math.isinf(graph_distance(cg, t, s))
        )
