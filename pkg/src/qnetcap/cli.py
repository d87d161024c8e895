"""Command-line interface.

Subcommands: generate, capacity, stats, sweep, asymptotics, fit.
Machine-readable JSON goes to stdout, logs to stderr; the exit code is
0 exactly when the operation completed.  All randomness flows from a
single ``--seed`` flag (or the config seed for sweeps); omitting it
selects a fresh seed, which is always logged.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import secrets
import sys

from . import asymptotics, ensemble, graphstats, netgen
from .capacity import CapacityGraph, LossParams, end_to_end_capacity, graph_distance

log = logging.getLogger("qnetcap")


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = secrets.randbits(63)
    log.info("master seed = %d", seed)
    return seed


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, allow_nan=False)
    sys.stdout.write("\n")


def _env_threads() -> int:
    raw = os.environ.get("QNETCAP_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    seed = _resolve_seed(args.seed)
    params = netgen.ModelParams(
        family=args.model,
        n=args.n,
        R_km=args.r,
        alpha=args.alpha,
        alphaL_km=args.alphal,
        m=args.m,
        p=args.p,
        seed=seed,
    )
    p_used = args.p
    if args.model == "erdos_renyi" and args.p is None:
        est = netgen.match_er_probability(params, trials=args.trials)
        log.info("matched p = %.6g (standard error %.2g)", est.p, est.std_error)
        params = netgen.ModelParams(
            family=args.model, n=args.n, R_km=args.r, alpha=args.alpha,
            alphaL_km=args.alphal, m=args.m, p=est.p, seed=seed,
        )
        p_used = est.p
    g = netgen.generate(params)
    netgen.save_graph(g, args.out)
    out = {
        "nodes": g.n_nodes,
        "edges": g.n_edges,
        "R_km": g.R_km,
        "rho": g.rho,
        "seed": seed,
        "out": args.out,
    }
    if p_used is not None:
        out["p"] = p_used
    _emit(out)
    return 0


def cmd_capacity(args) -> int:
    g = netgen.load_graph(args.graph)
    cg = CapacityGraph(g, LossParams(args.gamma))
    cut = end_to_end_capacity(cg, args.s, args.t)
    d = graph_distance(cg, args.s, args.t)
    _emit(
        {
            "source": args.s,
            "target": args.t,
            "capacity": cut.value,
            "cut_size": int(cut.cut_edges.shape[0]),
            "end_incident_ratio": cut.end_incident_ratio,
            "d_G_km": d if math.isfinite(d) else None,
            "connected": math.isfinite(d),
        }
    )
    return 0


def cmd_stats(args) -> int:
    g = netgen.load_graph(args.graph)
    hist = graphstats.degree_histogram(g)
    comp = graphstats.components(g)
    out = {
        "nodes": g.n_nodes,
        "edges": g.n_edges,
        "rho": g.rho,
        "mean_degree": hist.mean,
        "degree_variance": hist.variance,
        "dispersion": hist.dispersion,
        "giant_fraction": comp.giant_fraction,
        "components": comp.count,
    }
    if not args.skip_clustering:
        out["mean_clustering"] = graphstats.clustering(g).mean
    if g.n_nodes >= 100:
        fit = graphstats.fit_poisson(hist)
        out["poisson"] = {
            "lambda": fit.lam,
            "chi2": fit.chi2,
            "dof": fit.dof,
            "p_value": fit.p_value,
        }
    ks, surv = graphstats.cumulative_degree(hist)
    try:
        pl = graphstats.fit_power_law(ks, surv, k_min=args.k_min, k_max=args.k_max)
        out["power_law"] = {
            "exponent": pl.exponent,
            "residual_rms": pl.residual_rms,
            "k_range": list(pl.k_range),
        }
    except ValueError as exc:
        log.info("power-law fit skipped: %s", exc)
    if args.hist_out:
        with open(args.hist_out, "w", encoding="utf-8") as fh:
            fh.write("k,count\n")
            for k, c in enumerate(hist.counts):
                fh.write(f"{k},{int(c)}\n")
        out["hist_csv"] = args.hist_out
    if args.survival_out:
        with open(args.survival_out, "w", encoding="utf-8") as fh:
            fh.write("k,survival\n")
            for k, sv in zip(ks, surv):
                fh.write(f"{int(k)},{float(sv)!r}\n")
        out["survival_csv"] = args.survival_out
    _emit(out)
    return 0


def cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ensemble.ConfigError(f"config is not valid JSON: {exc}") from exc
    cfg = ensemble.ExperimentConfig.from_dict(doc)
    if args.seed is not None:
        cfg.seed = args.seed
    elif "seed" not in doc:
        cfg.seed = secrets.randbits(63)
    if args.full_scale:
        cfg.full_scale = True
    log.info("master seed = %d", cfg.seed)
    threads = args.threads if args.threads is not None else _env_threads()
    log.info(
        "sweep: %s, %d points x %d graphs x %d pairs, %d worker(s)",
        cfg.model,
        len(cfg.sweep_values) * len(cfg.region_list()),
        cfg.resolved_graphs_per_point,
        cfg.resolved_pairs_per_graph,
        threads,
    )
    result = ensemble.run_sweep(cfg, threads=threads)
    records_csv = f"{args.out_prefix}_records.csv"
    summary_csv = f"{args.out_prefix}_summary.csv"
    ensemble.write_records_csv(result, records_csv)
    ensemble.write_summary_csv(result, summary_csv)
    _emit(
        {
            "points": len(result.points),
            "records": len(result.records),
            "records_csv": records_csv,
            "summary_csv": summary_csv,
            "seed": cfg.seed,
        }
    )
    return 0


def cmd_asymptotics(args) -> int:
    spec = asymptotics.QuadratureSpec(
        rel_tol=args.rel_tol,
        r_max_km=args.r_max,
    )
    params: dict = {"gamma_per_km": args.gamma}
    if args.which == "zeta":
        res = asymptotics.zeta_waxman(spec, alphaL_km=args.alphal, gamma_per_km=args.gamma)
        params["alphaL_km"] = args.alphal
    elif args.which == "zeta_er":
        res = asymptotics.zeta_er(spec, gamma_per_km=args.gamma)
    elif args.which == "node_bound_waxman":
        seed = _resolve_seed(args.seed)
        res = asymptotics.node_bound_waxman_exact(
            args.n, args.r, args.alphal, args.gamma, samples=args.samples, seed=seed,
        )
        params.update({"n": args.n, "R_km": args.r, "alphaL_km": args.alphal, "seed": seed})
    elif args.which == "node_bound_er":
        if args.p is None:
            raise ValueError("node_bound_er requires --p")
        seed = _resolve_seed(args.seed)
        res = asymptotics.node_bound_er_exact(
            args.n, args.r, args.p, args.gamma, samples=args.samples, seed=seed,
        )
        params.update({"n": args.n, "R_km": args.r, "p": args.p, "seed": seed})
    elif args.which == "node_bound_scale_free":
        seed = _resolve_seed(args.seed)
        res = asymptotics.node_bound_scale_free(
            args.m, args.r, args.gamma, samples=args.samples,
            epsilon_km=args.epsilon_km, seed=seed,
        )
        params.update({"m": args.m, "R_km": args.r, "epsilon_km": args.epsilon_km, "seed": seed})
    else:  # critical_density
        if args.bound == "asymptotic":
            zeta = asymptotics.zeta_waxman(spec, alphaL_km=args.alphal, gamma_per_km=args.gamma).value
            rho_c = asymptotics.solve_critical_density(lambda rho: zeta * rho, target=args.target)
            res = asymptotics.BoundResult(value=rho_c, error=rho_c * 1e-6, method="quadrature")
            params.update({"alphaL_km": args.alphal, "bound": "asymptotic", "target": args.target})
        else:
            if args.r is None:
                raise ValueError("critical_density with --bound exact requires --r")
            seed = _resolve_seed(args.seed)
            pair_mean = asymptotics.node_bound_waxman_exact(
                2, args.r, args.alphal, args.gamma, samples=args.samples, seed=seed,
            ).value
            area = 4.0 * args.r * args.r

            def bound_fn(rho):
                return max(rho * area - 1.0, 0.0) * pair_mean

            rho_c = asymptotics.solve_critical_density(bound_fn, target=args.target)
            res = asymptotics.BoundResult(
                value=rho_c, error=rho_c * 1e-6, method="monte_carlo", samples=args.samples,
            )
            params.update(
                {"R_km": args.r, "alphaL_km": args.alphal, "bound": "exact",
                 "target": args.target, "seed": seed}
            )
    _emit(
        {
            "name": args.which,
            "value": res.value,
            "error": res.error,
            "method": res.method,
            "samples": res.samples,
            "params": params,
        }
    )
    return 0


def cmd_fit(args) -> int:
    import csv as _csv

    curve = []
    with open(args.summary, "r", encoding="utf-8", newline="") as fh:
        reader = _csv.DictReader(fh)
        needed = {"rho", "mean_C", "R_km"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ValueError(
                f"summary CSV must carry columns {sorted(needed)}, got {reader.fieldnames}"
            )
        for row in reader:
            if args.r_km is not None and not math.isclose(float(row["R_km"]), args.r_km):
                continue
            curve.append((float(row["rho"]), float(row["mean_C"])))
    if not curve:
        raise ValueError("no summary rows matched")
    curve.sort()
    out = {"points": len(curve), "level": args.level, "threshold": args.threshold}
    try:
        out["rho_c"] = ensemble.find_crossing(curve, level=args.level)
    except ValueError as exc:
        log.warning("crossing not found: %s", exc)
        out["rho_c"] = None
    try:
        slope, intercept = ensemble.fit_linear_above(curve, threshold=args.threshold)
        out["slope"] = slope
        out["intercept"] = intercept
    except ValueError as exc:
        log.warning("linear fit not possible: %s", exc)
        out["slope"] = None
        out["intercept"] = None
    _emit(out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnetcap",
        description="Quantum-network capacity experiments on random spatial graphs (all lengths in km).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="Generate a random network and write its JSON document.")
    g.add_argument("--model", required=True, choices=netgen.FAMILIES)
    g.add_argument("--n", type=int, required=True, help="number of nodes")
    g.add_argument("--r", type=float, default=None, help="region half-width R in km")
    g.add_argument("--alpha", type=float, default=None,
                   help="distance-decay constant; implies R = alphaL/(2*sqrt(2)*alpha)")
    g.add_argument("--alphal", type=float, default=226.0, help="characteristic fiber length in km")
    g.add_argument("--m", type=int, default=2, help="edges per new node (scale_free)")
    g.add_argument("--p", type=float, default=None, help="uniform link probability (erdos_renyi)")
    g.add_argument("--trials", type=int, default=100_000,
                   help="Monte Carlo pair samples when matching p (erdos_renyi without --p)")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True, help="output JSON graph path")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("capacity", help="Exact end-to-end capacity between two nodes of a graph file.")
    c.add_argument("--graph", required=True)
    c.add_argument("--s", type=int, required=True)
    c.add_argument("--t", type=int, required=True)
    c.add_argument("--gamma", type=float, default=0.02, help="attenuation exponent per km")
    c.set_defaults(func=cmd_capacity)

    st = sub.add_parser("stats", help="Degree / component / clustering statistics of a graph file.")
    st.add_argument("--graph", required=True)
    st.add_argument("--hist-out", default=None, help="write degree histogram CSV here")
    st.add_argument("--survival-out", default=None, help="write cumulative degree CSV here")
    st.add_argument("--k-min", type=int, default=1, help="power-law fit window lower bound")
    st.add_argument("--k-max", type=int, default=None, help="power-law fit window upper bound")
    st.add_argument("--skip-clustering", action="store_true",
                    help="skip the O(N^2) clustering computation")
    st.set_defaults(func=cmd_stats)

    sw = sub.add_parser("sweep", help="Run an ensemble sweep from a JSON config; writes two CSVs.")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out-prefix", required=True)
    sw.add_argument("--seed", type=int, default=None, help="override the config seed")
    sw.add_argument("--threads", type=int, default=None,
                    help="worker cap (default: QNETCAP_THREADS or 1)")
    sw.add_argument("--full-scale", action="store_true",
                    help="restore the published 100 graphs x 50 pairs protocol")
    sw.set_defaults(func=cmd_sweep)

    a = sub.add_parser("asymptotics", help="Evaluate an analytic bound; prints a JSON record.")
    a.add_argument("--which", required=True,
                   choices=["zeta", "zeta_er", "node_bound_waxman", "node_bound_er",
                            "node_bound_scale_free", "critical_density"])
    a.add_argument("--alphal", type=float, default=226.0)
    a.add_argument("--gamma", type=float, default=0.02)
    a.add_argument("--rel-tol", type=float, default=1e-8)
    a.add_argument("--r-max", type=float, default=None, help="radial cutoff in km")
    a.add_argument("--n", type=int, default=2, help="node count for finite-region bounds")
    a.add_argument("--r", type=float, default=None, help="region half-width in km")
    a.add_argument("--p", type=float, default=None)
    a.add_argument("--m", type=int, default=2)
    a.add_argument("--samples", type=int, default=1_000_000)
    a.add_argument("--epsilon-km", type=float, default=1e-3)
    a.add_argument("--target", type=float, default=1.0)
    a.add_argument("--bound", choices=["asymptotic", "exact"], default="asymptotic")
    a.add_argument("--seed", type=int, default=None)
    a.set_defaults(func=cmd_asymptotics)

    f = sub.add_parser("fit", help="Crossing and linear fit of a sweep summary CSV.")
    f.add_argument("--summary", required=True)
    f.add_argument("--level", type=float, default=1.0)
    f.add_argument("--threshold", type=float, default=0.1)
    f.add_argument("--r-km", type=float, default=None, help="restrict to one region size")
    f.set_defaults(func=cmd_fit)

    return parser


def _setup_logging() -> None:
    # bind to the *current* stderr so embedded invocations log correctly
    log.setLevel(logging.INFO)
    log.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(handler)
    log.propagate = False


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
