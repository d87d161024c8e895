"""Panel renderers for the eight figure layouts.

Each ``render_*`` function reads already-validated data frames, draws
onto a fresh matplotlib figure, writes the output file and returns a
small metadata dict (echoed as JSON by the CLI).  Everything here is
plotting plus overlay arithmetic on the CSV columns; no simulation.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# Reference densities overlaid on transition plots: giant-component
# threshold and the single-photon-protocol prediction from prior work
# (plotted as external constants, never computed here).
RHO_G = 7e-6
RHO_B = 6.82e-5

plt.rcParams.update(
    {
        "figure.dpi": 150,
        "font.size": 9,
        "axes.labelsize": 10,
        "legend.fontsize": 8,
        "axes.grid": True,
        "grid.alpha": 0.3,
    }
)


def crossing_density(rho, values, level=1.0):
    """Density where the curve crosses ``level``; same log-log
    interpolation the sweep fitter uses, so markers agree with it."""
    pts = sorted(zip((float(r) for r in rho), (float(v) for v in values)))
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
    return None


def equal_count_bins(d, c, bin_count=20):
    """Equal-count distance bins (remainder on the leading groups)."""
    order = np.argsort(d, kind="stable")
    d, c = np.asarray(d)[order], np.asarray(c)[order]
    n = d.size
    base, rem = divmod(n, bin_count)
    xs, ys = [], []
    start = 0
    for b in range(bin_count):
        size = base + (1 if b < rem else 0)
        if size == 0:
            continue
        xs.append(d[start : start + size].mean())
        ys.append(c[start : start + size].mean())
        start += size
    return np.array(xs), np.array(ys)


def _density_markers(ax, rho_c):
    ax.axvline(RHO_G, color="tab:gray", ls=":", lw=1)
    ax.axvline(RHO_B, color="tab:brown", ls=":", lw=1)
    trans = ax.get_xaxis_transform()
    ax.annotate(r"$\rho_G$", (RHO_G, 0.04), xycoords=trans, fontsize=8)
    ax.annotate(r"$\rho_B$", (RHO_B, 0.04), xycoords=trans, fontsize=8)
    if rho_c is not None:
        ax.axvline(rho_c, color="tab:red", ls="--", lw=1)
        ax.annotate(r"$\rho_c$", (rho_c, 0.04), xycoords=trans, fontsize=8, color="tab:red")


def render_f1(hist, survival, out):
    """Degree statistics: (a) histogram + Poisson curve, (b) log-log
    cumulative degree distribution + power-law fit line."""
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(7.2, 3.0))

    k = hist["k"].to_numpy()
    counts = hist["count"].to_numpy(dtype=float)
    n = counts.sum()
    lam = (k * counts).sum() / n
    ax_a.bar(k, counts, width=0.85, color="tab:blue", alpha=0.75, label="empirical")
    kk = np.arange(0, max(int(k.max()), 1) + 1)
    log_pmf = kk * math.log(lam) - lam - np.array([math.lgamma(x + 1) for x in kk])
    ax_a.plot(kk, n * np.exp(log_pmf), "r-", lw=1.5, label=f"Poisson($\\lambda$={lam:.2f})")
    ax_a.set_xlabel("degree $k$")
    ax_a.set_ylabel("nodes")
    ax_a.legend()
    ax_a.set_title("(a) distance-decay model")

    ks = survival["k"].to_numpy(dtype=float)
    sv = survival["survival"].to_numpy(dtype=float)
    keep = (ks >= 1) & (sv > 0)
    ax_b.loglog(ks[keep], sv[keep], "o", ms=3, label="empirical")
    lk, ls = np.log10(ks[keep]), np.log10(sv[keep])
    kmax = ks[keep].max()
    win = (ks[keep] >= 2) & (ks[keep] <= max(kmax / 2, 3))
    slope, intercept = np.polyfit(lk[win], ls[win], 1)
    ax_b.loglog(ks[keep], 10 ** (intercept + slope * lk), "r-", lw=1.5,
                label=f"$k^{{{slope:.2f}}}$")
    ax_b.set_xlabel("degree $k$")
    ax_b.set_ylabel(r"$P(K \geq k)$")
    ax_b.legend()
    ax_b.set_title("(b) growth model")

    fig.tight_layout()
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    return {"poisson_lambda": float(lam), "power_law_slope": float(slope)}


def _select_points(records, points):
    available = sorted(records["point_index"].unique())
    if points is None:
        return available[: min(5, len(available))]
    missing = [p for p in points if p not in available]
    if missing:
        raise ValueError(f"point indices {missing} not present in records (have {available})")
    return points


def render_f2(records, out, points=None, bin_count=20):
    """Capacity vs graph distance: per-point panels, one sample graph
    scattered, red line for the binned ensemble mean."""
    points = _select_points(records, points)
    fig, axes = plt.subplots(1, len(points), figsize=(2.6 * len(points), 2.8), squeeze=False)
    for ax, pidx in zip(axes[0], points):
        sub = records[(records["point_index"] == pidx) & records["connected"]]
        if sub.empty:
            ax.set_title(f"point {pidx}: no connected pairs")
            continue
        one = sub[sub["graph_index"] == sub["graph_index"].min()]
        ax.semilogy(one["d_G_km"], one["capacity"], "o", ms=3, alpha=0.6, label="one sample")
        if len(sub) >= bin_count:
            xs, ys = equal_count_bins(sub["d_G_km"].to_numpy(), sub["capacity"].to_numpy(), bin_count)
            pos = ys > 0
            ax.semilogy(xs[pos], ys[pos], "r--", lw=1.5, label="binned mean")
        rho = records.loc[records["point_index"] == pidx, "rho"].iloc[0]
        ax.set_title(f"$\\rho$ = {rho:.2e}")
        ax.set_xlabel(r"$d_G$ (km)")
    axes[0][0].set_ylabel("capacity (ebits/use)")
    axes[0][0].legend()
    fig.tight_layout()
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    return {"points": [int(p) for p in points]}


def render_f3(summary, out, er_summaries=(), level=1.0):
    """Capacity transition: (a) mean capacity vs density with bound
    overlays and density markers, (b) end-edge cut ratio, (c) uniform-
    probability model with its per-alpha bound lines."""
    n_panels = 3 if er_summaries else 2
    fig, axes = plt.subplots(1, n_panels, figsize=(3.3 * n_panels, 3.0))

    rho = summary["rho"].to_numpy()
    mean_c = summary["mean_C"].to_numpy()
    rho_c = crossing_density(rho, mean_c, level)
    zeta = float((summary["bound_asymptotic"] / summary["rho"]).iloc[0])

    ax = axes[0]
    pos = mean_c > 0
    ax.loglog(rho[pos], mean_c[pos], "o-", ms=4, label=r"$\langle C\rangle$")
    grid = np.geomspace(rho.min(), rho.max(), 200)
    ax.loglog(grid, zeta * grid, "-", color="darkgreen", lw=1.2, label=r"$\zeta\rho$")
    if rho_c is not None:
        shifted = zeta * (grid - rho_c) + level
        ok = shifted > 0
        ax.loglog(grid[ok], shifted[ok], "--", color="limegreen", lw=1.2,
                  label=r"$\zeta(\rho-\rho_c)+1$")
    _density_markers(ax, rho_c)
    ax.set_xlabel(r"$\rho$ (nodes/km$^2$)")
    ax.set_ylabel(r"$\langle C\rangle$ (ebits/use)")
    ax.legend()
    ax.set_title("(a)")

    ax = axes[1]
    ax.semilogx(rho, summary["mean_ratio"].to_numpy(), "s-", ms=4)
    _density_markers(ax, rho_c)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel(r"$\rho$ (nodes/km$^2$)")
    ax.set_ylabel("end-edge cut fraction")
    ax.set_title("(b)")

    if er_summaries:
        ax = axes[2]
        for df in er_summaries:
            r = df["rho"].to_numpy()
            c = df["mean_C"].to_numpy()
            slope = float((df["bound_asymptotic"] / df["rho"]).iloc[0])
            R = float(df["R_km"].iloc[0])
            ok = c > 0
            line, = ax.loglog(r[ok], c[ok], "o-", ms=4, label=f"R = {R:.0f} km")
            g = np.geomspace(r.min(), r.max(), 50)
            ax.loglog(g, slope * g, "--", lw=1.0, color=line.get_color())
        ax.set_xlabel(r"$\rho$ (nodes/km$^2$)")
        ax.set_ylabel(r"$\langle C\rangle$ (ebits/use)")
        ax.legend()
        ax.set_title("(c) uniform-probability model")

    fig.tight_layout()
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    return {"rho_c": rho_c, "zeta": zeta}


def render_f4(summary, out):
    """Growth-model saturation: (a) capacity vs N per region size,
    (b) cut ratio vs N, (c) saturated capacity and bound vs R."""
    fig, axes = plt.subplots(1, 3, figsize=(9.9, 3.0))
    for R, df in summary.groupby("R_km"):
        df = df.sort_values("N")
        pos = df["mean_C"] > 0
        axes[0].loglog(df["N"][pos], df["mean_C"][pos], "o-", ms=4, label=f"R = {R:.0f} km")
        axes[1].semilogx(df["N"], df["mean_ratio"], "s-", ms=4, label=f"R = {R:.0f} km")
    axes[0].set_xlabel("N")
    axes[0].set_ylabel(r"$\langle C\rangle$ (ebits/use)")
    axes[0].legend()
    axes[0].set_title("(a)")
    axes[1].set_xlabel("N")
    axes[1].set_ylabel("end-edge cut fraction")
    axes[1].set_title("(b)")

    tail = summary.loc[summary.groupby("R_km")["N"].idxmax()].sort_values("R_km")
    axes[2].semilogy(tail["R_km"], tail["mean_C"], "o-", ms=4, label=r"$\langle C\rangle$ at top N")
    axes[2].semilogy(tail["R_km"], tail["bound_exact"], "-", color="tab:orange", lw=1.4,
                     label="node-capacity bound")
    axes[2].set_xlabel("R (km)")
    axes[2].set_ylabel("ebits/use")
    axes[2].legend()
    axes[2].set_title("(c)")

    fig.tight_layout()
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    return {"regions": sorted(float(r) for r in summary["R_km"].unique())}


def render_f5(giant, out):
    """Giant-component fraction vs density with the threshold marker."""
    fig, ax = plt.subplots(figsize=(3.6, 3.0))
    ax.semilogx(giant["rho"], giant["giant_fraction"], "o-", ms=4)
    ax.axvline(RHO_G, color="tab:gray", ls=":", lw=1)
    ax.annotate(r"$\rho_G$", (RHO_G, 0.05), xycoords=ax.get_xaxis_transform(), fontsize=8)
    crossing = crossing_density(giant["rho"], giant["giant_fraction"], 0.5)
    if crossing is not None:
        ax.axvline(crossing, color="tab:red", ls="--", lw=1)
    ax.set_xlabel(r"$\rho$ (nodes/km$^2$)")
    ax.set_ylabel(r"$N_G / N$")
    ax.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    return {"crossing_0p5": crossing}


def render_f6(records, out, points=None, bin_count=20):
    """Distribution detail panels: 2-D histogram of capacity vs
    distance, shaded by sqrt(count), with the binned mean overlay."""
    points = _select_points(records, points)
    fig, axes = plt.subplots(1, len(points), figsize=(2.8 * len(points), 2.9), squeeze=False)
    for ax, pidx in zip(axes[0], points):
        sub = records[(records["point_index"] == pidx) & records["connected"]]
        sub = sub[sub["capacity"] > 0]
        if len(sub) < bin_count:
            ax.set_title(f"point {pidx}: too few pairs")
            continue
        d = sub["d_G_km"].to_numpy()
        logc = np.log10(sub["capacity"].to_numpy())
        h, xe, ye = np.histogram2d(d, logc, bins=24)
        # sqrt scale stretches the sparse tail of the distribution
        ax.pcolormesh(xe, ye, np.sqrt(h.T), cmap="Greys")
        xs, ys = equal_count_bins(d, sub["capacity"].to_numpy(), bin_count)
        pos = ys > 0
        ax.plot(xs[pos], np.log10(ys[pos]), "r-", lw=1.5)
        rho = records.loc[records["point_index"] == pidx, "rho"].iloc[0]
        ax.set_title(f"$\\rho$ = {rho:.2e}")
        ax.set_xlabel(r"$d_G$ (km)")
    axes[0][0].set_ylabel(r"$\log_{10}$ capacity")
    fig.tight_layout()
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    return {"points": [int(p) for p in points]}


def render_f7(summary, out):
    """Mean vs median capacity across the density sweep."""
    fig, ax = plt.subplots(figsize=(3.6, 3.0))
    rho = summary["rho"].to_numpy()
    for col, style, label in [("mean_C", "o-", "mean"), ("median_C", "s--", "median")]:
        vals = summary[col].to_numpy()
        pos = vals > 0
        ax.loglog(rho[pos], vals[pos], style, ms=4, label=label)
    ax.set_xlabel(r"$\rho$ (nodes/km$^2$)")
    ax.set_ylabel("capacity (ebits/use)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    return {}


def render_f8(bounds, out):
    """Finite-region node-capacity bound vs R against its asymptote."""
    zeta = None
    rows = []
    for rec in bounds:
        if rec["name"] == "zeta":
            zeta = rec["value"]
        elif rec["name"] == "node_bound_waxman":
            params = rec.get("params", {})
            if "R_km" not in params or "n" not in params:
                raise ValueError("node_bound_waxman records need params.R_km and params.n")
            rows.append((params["R_km"], params["n"], rec["value"]))
    if not rows:
        raise ValueError("no node_bound_waxman records in the bounds file")
    rows.sort()
    R = np.array([r for r, _, _ in rows])
    n = np.array([x for _, x, _ in rows])
    val = np.array([v for _, _, v in rows])
    rho = n / (4 * R * R)
    fig, ax = plt.subplots(figsize=(3.6, 3.0))
    if zeta is not None:
        ax.plot(R, val / (zeta * rho), "o-", ms=4)
        ax.axhline(1.0, color="tab:orange", lw=1.4)
        ax.set_ylabel(r"bound / $\zeta\rho$")
    else:
        ax.semilogy(R, val, "o-", ms=4)
        ax.set_ylabel("bound (ebits/use)")
    ax.set_xlabel("R (km)")
    fig.tight_layout()
    fig.savefig(out, bbox_inches="tight")
    plt.close(fig)
    return {"regions": [float(r) for r in R]}
