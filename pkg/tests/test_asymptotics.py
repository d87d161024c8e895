import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from qnetcap.asymptotics import (
    BoundResult,
    QuadratureSpec,
    node_bound_er_exact,
    node_bound_scale_free,
    node_bound_waxman_exact,
    solve_critical_density,
    zeta_er,
    zeta_waxman,
)
from qnetcap.capacity import edge_capacity

# Frozen reference values, computed with the independent series /
# closed-form oracles below at 30 significant digits.
ZETA_WAXMAN_REF = 4357.90986735
ZETA_ER_REF = 5137.92860837


def series_zeta_waxman(alphaL=226.0, gamma=0.02):
    """Exact series: expand -log2(1-x) and integrate term by term."""
    mp.mp.dps = 30
    a = gamma * mp.log(10)
    s = mp.nsum(lambda k: 1 / (k * (1 / mp.mpf(alphaL) + k * a) ** 2), [1, mp.inf])
    return float(2 * mp.pi / mp.log(2) * s)


def closed_form_zeta_er(gamma=0.02):
    """2*pi*zeta(3) / (ln2 * (gamma ln10)^2), from the same expansion."""
    mp.mp.dps = 30
    a = gamma * mp.log(10)
    return float(2 * mp.pi * mp.zeta(3) / (mp.log(2) * a**2))


def pair_mean_quadrature(g, R):
    def fu(u):
        return (2 * R - abs(u)) / (4 * R * R)

    val, _ = integrate.dblquad(
        lambda v, u: 4 * fu(u) * fu(v) * g(math.hypot(u, v)),
        0, 2 * R, 0, 2 * R, epsabs=1e-13, epsrel=1e-10,
    )
    return val


# --- radial integrals --------------------------------------------------------

def test_zeta_waxman_value():
    res = zeta_waxman()
    assert res.method == "quadrature"
    assert res.value == pytest.approx(ZETA_WAXMAN_REF, abs=1e-4)
    assert res.value == pytest.approx(series_zeta_waxman(), rel=1e-9)
    assert abs(res.value - 4357.9) <= 1.0  # published constant
    assert res.error < 1e-3


def test_zeta_er_value():
    res = zeta_er()
    assert res.value == pytest.approx(ZETA_ER_REF, abs=1e-4)
    assert res.value == pytest.approx(closed_form_zeta_er(), rel=1e-9)
    assert abs(res.value - 5137.9) <= 1.0


def test_zeta_waxman_vanishes_at_huge_attenuation():
    res = zeta_waxman(gamma_per_km=1e3)
    assert 0 < res.value < 1e-3


def test_zeta_self_consistent_under_tolerance_halving():
    loose = zeta_waxman(QuadratureSpec(rel_tol=1e-6))
    tight = zeta_waxman(QuadratureSpec(rel_tol=5e-7))
    assert abs(loose.value - tight.value) <= max(loose.error, 1e-9)


def test_zeta_er_quarter_scaling():
    # r -> r/2 substitution: doubling gamma divides the integral by 4
    one = zeta_er(gamma_per_km=0.02)
    two = zeta_er(gamma_per_km=0.04)
    assert two.value == pytest.approx(one.value / 4.0, rel=1e-8)


def test_zeta_er_exceeds_zeta_waxman():
    assert zeta_er().value > zeta_waxman().value


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(subdivision_limit=2)


# --- finite-region Monte Carlo bounds -----------------------------------------

def test_node_bound_tiny_region_bounded_below():
    # no link decay, tiny region: every pair capacity at least that of
    # the region diagonal
    R = 1e-3
    res = node_bound_waxman_exact(2, R, alphaL_km=1e12, samples=100_000, seed=5)
    assert res.value >= edge_capacity(2 * math.sqrt(2) * R)


def test_node_bound_waxman_matches_quadrature():
    R, n = 799.0, 1000
    res = node_bound_waxman_exact(n, R, samples=2_000_000, seed=7)
    oracle = (n - 1) * pair_mean_quadrature(
        lambda r: math.exp(-r / 226.0) * edge_capacity(max(r, 1e-9)), R
    )
    assert abs(res.value - oracle) <= 4 * res.error


def test_node_bound_waxman_near_asymptote_at_large_R():
    rho = 1e-4
    R = 2000.0
    n = int(round(rho * 4 * R * R))
    res = node_bound_waxman_exact(n, R, samples=4_000_000, seed=11)
    ratio = res.value / (zeta_waxman().value * n / (4 * R * R))
    assert 0.95 <= ratio <= 1.05


def test_node_bound_deterministic_and_seed_consistent():
    a = node_bound_waxman_exact(100, 500.0, samples=200_000, seed=3)
    b = node_bound_waxman_exact(100, 500.0, samples=200_000, seed=3)
    assert a == b
    c = node_bound_waxman_exact(100, 500.0, samples=200_000, seed=4)
    # independent seeds agree within 4 combined standard errors
    assert abs(a.value - c.value) <= 4 * math.hypot(a.error, c.error)


def test_node_bound_er_matches_quadrature():
    R, n, p = 400.0, 500, 0.3
    res = node_bound_er_exact(n, R, p, samples=2_000_000, seed=9)
    oracle = (n - 1) * p * pair_mean_quadrature(lambda r: edge_capacity(max(r, 1e-9)), R)
    assert abs(res.value - oracle) <= 4 * res.error


def test_scale_free_bound_linear_in_m():
    two = node_bound_scale_free(2, 800.0, samples=200_000, seed=13)
    four = node_bound_scale_free(4, 800.0, samples=200_000, seed=13)
    assert four.value == pytest.approx(2.0 * two.value, rel=1e-12)


def test_scale_free_bound_grows_as_region_shrinks():
    small = node_bound_scale_free(2, 160.0, samples=500_000, seed=15)
    large = node_bound_scale_free(2, 800.0, samples=500_000, seed=15)
    assert small.value > large.value


def test_scale_free_bound_matches_quadrature():
    R, eps = 400.0, 1e-3
    res = node_bound_scale_free(2, R, samples=2_000_000, epsilon_km=eps, seed=17)
    num = pair_mean_quadrature(lambda r: edge_capacity(max(r, eps)) / max(r, eps), R)
    den = pair_mean_quadrature(lambda r: 1.0 / max(r, eps), R)
    oracle = 4.0 * num / den
    assert abs(res.value - oracle) <= 5 * res.error


def test_sample_floor_enforced():
    with pytest.raises(ValueError):
        node_bound_waxman_exact(10, 100.0, samples=10)
    with pytest.raises(ValueError):
        node_bound_scale_free(2, 100.0, samples=200_000, epsilon_km=0.0)


# --- critical density ----------------------------------------------------------

def test_critical_density_asymptotic_inverse():
    zeta = zeta_waxman().value
    rho_c = solve_critical_density(lambda rho: zeta * rho, target=1.0)
    assert rho_c == pytest.approx(1.0 / zeta, rel=1e-6)
    assert rho_c == pytest.approx(2.2946e-4, rel=1e-3)


def test_critical_density_unbracketed_target():
    zeta = zeta_waxman().value
    with pytest.raises(ValueError):
        solve_critical_density(lambda rho: zeta * rho, target=0.0)


def test_critical_density_exact_bound_below_empirical():
    # continuous-N finite-region bound at R ~ 800 km: its unit-capacity
    # root must undershoot the observed transition density 4.25e-4,
    # because the node capacity upper-bounds the end-to-end capacity
    R = 799.0
    pair_mean = node_bound_waxman_exact(2, R, samples=1_000_000, seed=19).value
    area = 4 * R * R

    def bound_fn(rho):
        return max(rho * area - 1.0, 0.0) * pair_mean

    rho_star = solve_critical_density(bound_fn, target=1.0)
    assert 0 < rho_star < 4.25e-4
