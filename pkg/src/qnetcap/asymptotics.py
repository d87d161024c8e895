"""Numerical evaluation of the analytic capacity bounds.

Two kinds of estimates:

* radial improper integrals behind the large-region constants
  (``zeta`` for the distance-decaying model, ``zeta_er`` for uniform
  connection probability), evaluated by adaptive quadrature with the
  integrable log singularity at the origin isolated by forced
  subdivision points;
* finite-region double integrals over independent uniform point pairs,
  estimated by seeded Monte Carlo with reported standard errors (the
  integrands are smooth and only ~3 digits are needed, so 4-D tensor
  quadrature would be wasted effort).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .capacity import LossParams, edge_capacity_array
from .seeding import derive_rng

__all__ = [
    "QuadratureSpec",
    "BoundResult",
    "zeta_waxman",
    "zeta_er",
    "node_bound_waxman_exact",
    "node_bound_er_exact",
    "node_bound_scale_free",
    "solve_critical_density",
]

_LN2 = math.log(2.0)

# Radial cutoffs chosen so the truncated tail is far below the default
# relative tolerance: the decaying-probability integrand falls off like
# exp(-r/alphaL) * 10**(-gamma r), the uniform one like 10**(-gamma r).
_R_MAX_WAXMAN_KM = 6000.0
_R_MAX_ER_KM = 2500.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the adaptive radial quadratures."""

    rel_tol: float = 1e-8
    r_max_km: float | None = None
    subdivision_limit: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.subdivision_limit < 10:
            raise ValueError("subdivision_limit must be at least 10")


@dataclass(frozen=True)
class BoundResult:
    """A numerically evaluated bound with its error estimate."""

    value: float
    error: float
    method: str  # "quadrature" | "monte_carlo"
    samples: int | None = None


def _quad_or_raise(fn, lo, hi, spec: QuadratureSpec, forced_points):
    out = integrate.quad(
        fn,
        lo,
        hi,
        epsabs=0.0,
        epsrel=spec.rel_tol,
        limit=spec.subdivision_limit,
        points=forced_points,
        full_output=True,
    )
    if len(out) > 3:
        value, abserr, info, message = out[:4]
        raise RuntimeError(
            f"quadrature did not converge within {spec.subdivision_limit} "
            f"subdivisions: {message} (last estimate {value!r}, abserr {abserr!r})"
        )
    value, abserr, _ = out
    return value, abserr


def _cap_scalar(r: float, gamma: float) -> float:
    # -log2(1 - 10**(-gamma r)); integrable log blow-up at r -> 0
    return -math.log1p(-(10.0 ** (-gamma * r))) / _LN2


def zeta_waxman(
    spec: QuadratureSpec = QuadratureSpec(),
    alphaL_km: float = 226.0,
    gamma_per_km: float = 0.02,
) -> BoundResult:
    """Large-region node-capacity slope for the distance-decaying model.

    ``2*pi * integral_0^inf r exp(-r/alphaL) * cap(r) dr`` where
    ``cap`` is the pure-loss edge capacity; the mean node capacity
    approaches ``zeta * rho`` as the region grows.
    """
    r_max = spec.r_max_km if spec.r_max_km is not None else _R_MAX_WAXMAN_KM

    def integrand(r):
        if r <= 0.0:
            return 0.0
        return r * math.exp(-r / alphaL_km) * _cap_scalar(r, gamma_per_km)

    forced = sorted({p for p in (1e-3 / gamma_per_km, 1.0, 50.0, 500.0) if 0 < p < r_max})
    value, abserr = _quad_or_raise(integrand, 0.0, r_max, spec, forced)
    return BoundResult(value=2.0 * math.pi * value, error=2.0 * math.pi * abserr, method="quadrature")


def zeta_er(
    spec: QuadratureSpec = QuadratureSpec(),
    gamma_per_km: float = 0.02,
) -> BoundResult:
    """Same radial integral without the distance-decaying link factor."""
    r_max = spec.r_max_km if spec.r_max_km is not None else _R_MAX_ER_KM

    def integrand(r):
        if r <= 0.0:
            return 0.0
        return r * _cap_scalar(r, gamma_per_km)

    forced = sorted({p for p in (1e-3 / gamma_per_km, 1.0, 50.0, 500.0) if 0 < p < r_max})
    value, abserr = _quad_or_raise(integrand, 0.0, r_max, spec, forced)
    return BoundResult(value=2.0 * math.pi * value, error=2.0 * math.pi * abserr, method="quadrature")


# Monte Carlo pair draws are consumed in fixed-size chunks so sample
# counts far beyond memory are fine and results stay deterministic.
_MC_CHUNK = 1_000_000


def _pair_distance_chunks(R_km: float, samples: int, rng):
    done = 0
    while done < samples:
        m = min(_MC_CHUNK, samples - done)
        a = rng.uniform(-R_km, R_km, size=(m, 2))
        b = rng.uniform(-R_km, R_km, size=(m, 2))
        d = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])
        # exact coincidence is a measure-zero event; nudge to keep the
        # capacity law finite
        yield np.maximum(d, 1e-12)
        done += m


def _mc_mean_se(fn, R_km: float, samples: int, seed: int) -> tuple:
    rng = derive_rng(seed)
    total = 0.0
    total_sq = 0.0
    for d in _pair_distance_chunks(R_km, samples, rng):
        vals = fn(d)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)


def node_bound_waxman_exact(
    n: int,
    R_km: float,
    alphaL_km: float = 226.0,
    gamma_per_km: float = 0.02,
    samples: int = 1_000_000,
    seed: int = 0,
) -> BoundResult:
    """Finite-region mean node capacity of the distance-decaying model.

    ``(n - 1) * E[exp(-D/alphaL) * cap(D)]`` over independent uniform
    point pairs in the square, estimated by Monte Carlo.
    """
    if samples < 100_000:
        raise ValueError("need at least 10^5 samples")
    loss = LossParams(gamma_per_km)
    mean, se = _mc_mean_se(
        lambda d: np.exp(-d / alphaL_km) * edge_capacity_array(d, loss),
        R_km, samples, seed,
    )
    return BoundResult(
        value=(n - 1) * mean,
        error=(n - 1) * se,
        method="monte_carlo",
        samples=samples,
    )


def node_bound_er_exact(
    n: int,
    R_km: float,
    p: float,
    gamma_per_km: float = 0.02,
    samples: int = 1_000_000,
    seed: int = 0,
) -> BoundResult:
    """Finite-region mean node capacity with uniform link probability:
    ``(n - 1) * p * E[cap(D)]`` over uniform point pairs."""
    if samples < 100_000:
        raise ValueError("need at least 10^5 samples")
    loss = LossParams(gamma_per_km)
    mean, se = _mc_mean_se(lambda d: edge_capacity_array(d, loss), R_km, samples, seed)
    return BoundResult(
        value=(n - 1) * p * mean,
        error=(n - 1) * p * se,
        method="monte_carlo",
        samples=samples,
    )


def node_bound_scale_free(
    m: int,
    R_km: float,
    gamma_per_km: float = 0.02,
    samples: int = 1_000_000,
    epsilon_km: float = 1e-3,
    seed: int = 0,
) -> BoundResult:
    """Scale-independent node-capacity bound of the growth model.

    ``2m * E[w * cap(D)] / E[w]`` with inverse-distance weight
    ``w = 1 / max(D, epsilon)`` over shared uniform pair samples (a
    ratio estimator: the unknown mean-degree normalization cancels).
    The floor ``epsilon`` tames the log-divergent variance of the raw
    ``1/D`` weight and perturbs the value only at O(epsilon).
    """
    if samples < 100_000:
        raise ValueError("need at least 10^5 samples")
    if epsilon_km <= 0:
        raise ValueError("epsilon_km must be positive")
    loss = LossParams(gamma_per_km)
    rng = derive_rng(seed)
    sw = swc = swc_sq = sw_sq = swwc = 0.0
    for d in _pair_distance_chunks(R_km, samples, rng):
        df = np.maximum(d, epsilon_km)
        w = 1.0 / df
        wc = w * edge_capacity_array(df, loss)
        sw += float(w.sum())
        swc += float(wc.sum())
        sw_sq += float((w * w).sum())
        swc_sq += float((wc * wc).sum())
        swwc += float((w * wc).sum())
    w_mean = sw / samples
    ratio = (swc / samples) / w_mean
    # delta-method standard error of the ratio estimator:
    # Var(wc - ratio*w) / (n * E[w]^2)
    var_resid = (swc_sq - 2 * ratio * swwc + ratio * ratio * sw_sq) / samples
    var_resid -= ((swc / samples) - ratio * w_mean) ** 2  # = 0 up to rounding
    se = math.sqrt(max(var_resid, 0.0) / samples) / w_mean
    return BoundResult(
        value=2.0 * m * ratio,
        error=2.0 * m * se,
        method="monte_carlo",
        samples=samples,
    )


def solve_critical_density(
    bound_fn,
    target: float = 1.0,
    rho_lo: float = 1e-9,
    rho_hi: float = 1.0,
    rel_tol: float = 1e-6,
    max_iter: int = 200,
) -> float:
    """Bisection root of ``bound_fn(rho) = target`` for a bound that is
    monotone increasing in the density.

    Raises ``ValueError`` when the target is not bracketed by
    ``[rho_lo, rho_hi]``.
    """
    f_lo = bound_fn(rho_lo) - target
    f_hi = bound_fn(rho_hi) - target
    if f_lo == 0.0:
        return rho_lo
    if f_hi == 0.0:
        return rho_hi
    if f_lo * f_hi > 0:
        raise ValueError(
            f"target {target} not bracketed on [{rho_lo}, {rho_hi}] "
            f"(bound values {f_lo + target}, {f_hi + target})"
        )
    lo, hi = rho_lo, rho_hi
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
        f_mid = bound_fn(mid) - target
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo <= rel_tol * mid:
            return math.sqrt(lo * hi)
    return math.sqrt(lo * hi)
