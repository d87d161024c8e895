"""Figure-script tests.

Inputs are produced by invoking the installed ``qnetcap`` CLI (the
primary package's external interface); nothing here imports qnetcap.
When the primary acceptance run has left its CSVs in out/acceptance/,
the transition figure test consumes those instead of the small local
sweeps.
"""
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from qnetcap_figures.cli import main as figure_main

QNETCAP = shutil.which("qnetcap")
ACCEPTANCE_DIR = Path(__file__).resolve().parents[2] / "out" / "acceptance"

pytestmark = pytest.mark.skipif(QNETCAP is None, reason="qnetcap CLI not installed")


def qnetcap(*argv):
    proc = subprocess.run(
        [QNETCAP, *map(str, argv)], capture_output=True, text=True, check=True
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def run_figure(capsys, *argv):
    code = figure_main([str(a) for a in argv])
    captured = capsys.readouterr()
    meta = json.loads(captured.out) if code == 0 else None
    return code, meta, captured.err


def write_sweep_config(path, **kw):
    path.write_text(json.dumps(kw))
    return path


@pytest.fixture(scope="session")
def inputs(tmp_path_factory):
    """Small CLI-produced inputs for every figure id."""
    root = tmp_path_factory.mktemp("figure_inputs")

    cfg = write_sweep_config(
        root / "wax.json",
        model="waxman", sweep_variable="rho", sweep_values=[1e-4, 3e-4, 1e-3],
        alpha=0.5, graphs_per_point=6, pairs_per_graph=8, seed=41,
        bound_samples=100_000,
    )
    qnetcap("sweep", "--config", cfg, "--out-prefix", root / "wax")

    for tag, alpha, values in [
        ("er1", 1.0, [4e-4, 1e-3, 2.5e-3]),
        ("er05", 0.5, [5e-4, 1.2e-3, 2.5e-3]),
    ]:
        cfg = write_sweep_config(
            root / f"{tag}.json",
            model="erdos_renyi", sweep_variable="rho", sweep_values=values,
            alpha=alpha, graphs_per_point=5, pairs_per_graph=6, seed=42,
            bound_samples=100_000,
        )
        qnetcap("sweep", "--config", cfg, "--out-prefix", root / tag)

    cfg = write_sweep_config(
        root / "sf.json",
        model="scale_free", sweep_variable="N", sweep_values=[100, 316],
        R_km=[160.0, 400.0], m=2, graphs_per_point=5, pairs_per_graph=6, seed=43,
        bound_samples=100_000,
    )
    qnetcap("sweep", "--config", cfg, "--out-prefix", root / "sf")

    # degree statistics inputs
    qnetcap("generate", "--model", "waxman", "--n", "500", "--r", "3536",
            "--seed", "44", "--out", root / "wg.json")
    qnetcap("stats", "--graph", root / "wg.json", "--hist-out", root / "hist.csv",
            "--skip-clustering")
    qnetcap("generate", "--model", "scale_free", "--n", "1000", "--m", "2",
            "--r", "800", "--seed", "45", "--out", root / "sfg.json")
    qnetcap("stats", "--graph", root / "sfg.json", "--survival-out", root / "surv.csv",
            "--skip-clustering")

    # giant-fraction curve assembled from repeated generate+stats
    rows = ["rho,giant_fraction"]
    for rho in (2e-6, 8e-6, 3e-5):
        R = (400 / (4 * rho)) ** 0.5
        doc = qnetcap("generate", "--model", "waxman", "--n", "400", "--r", f"{R:.3f}",
                      "--seed", "46", "--out", root / "tmp_g.json")
        st = qnetcap("stats", "--graph", root / "tmp_g.json", "--skip-clustering")
        rows.append(f"{doc['rho']!r},{st['giant_fraction']!r}")
    (root / "giant.csv").write_text("\n".join(rows) + "\n")

    # bound records for the convergence figure
    lines = []
    proc = subprocess.run([QNETCAP, "asymptotics", "--which", "zeta"],
                          capture_output=True, text=True, check=True)
    lines.append(proc.stdout.strip())
    for R in (400, 800, 2000):
        n = int(round(1e-4 * 4 * R * R))
        proc = subprocess.run(
            [QNETCAP, "asymptotics", "--which", "node_bound_waxman", "--n", str(n),
             "--r", str(R), "--samples", "200000", "--seed", "47"],
            capture_output=True, text=True, check=True,
        )
        lines.append(proc.stdout.strip())
    (root / "bounds.jsonl").write_text("\n".join(lines) + "\n")
    return root


def test_f1_degree_panels(inputs, tmp_path, capsys):
    out = tmp_path / "f1.png"
    code, meta, _ = run_figure(
        capsys, "--id", "F1", "--hist", inputs / "hist.csv",
        "--survival", inputs / "surv.csv", "--out", out,
    )
    assert code == 0 and out.stat().st_size > 0
    assert meta["poisson_lambda"] > 0
    assert meta["power_law_slope"] < 0


def test_f2_scatter_panels(inputs, tmp_path, capsys):
    out = tmp_path / "f2.png"
    code, meta, _ = run_figure(
        capsys, "--id", "F2", "--records", inputs / "wax_records.csv",
        "--points", "1,2", "--bins", "10", "--out", out,
    )
    assert code == 0 and out.stat().st_size > 0
    assert meta["points"] == [1, 2]


def test_f3_transition_with_er_panel(inputs, tmp_path, capsys):
    out = tmp_path / "f3.svg"
    code, meta, _ = run_figure(
        capsys, "--id", "F3", "--summary", inputs / "wax_summary.csv",
        "--er-summary", inputs / "er1_summary.csv",
        "--er-summary", inputs / "er05_summary.csv",
        "--out", out,
    )
    assert code == 0 and out.stat().st_size > 0
    assert meta["rho_c"] is not None
    assert meta["zeta"] == pytest.approx(4357.9099, rel=1e-3)


def test_f3_crossing_matches_primary_fit(inputs, tmp_path, capsys):
    summary = inputs / "wax_summary.csv"
    code, meta, _ = run_figure(
        capsys, "--id", "F3", "--summary", summary, "--out", tmp_path / "f3.png",
    )
    assert code == 0
    fit = qnetcap("fit", "--summary", summary, "--level", "1.0")
    assert fit["rho_c"] is not None
    assert meta["rho_c"] == pytest.approx(fit["rho_c"], rel=1e-9)


def test_f4_saturation_panels(inputs, tmp_path, capsys):
    out = tmp_path / "f4.png"
    code, meta, _ = run_figure(
        capsys, "--id", "F4", "--summary", inputs / "sf_summary.csv", "--out", out,
    )
    assert code == 0 and out.stat().st_size > 0
    assert meta["regions"] == [160.0, 400.0]


def test_f5_giant_component(inputs, tmp_path, capsys):
    out = tmp_path / "f5.png"
    code, meta, _ = run_figure(
        capsys, "--id", "F5", "--giant", inputs / "giant.csv", "--out", out,
    )
    assert code == 0 and out.stat().st_size > 0


def test_f6_density_shading(inputs, tmp_path, capsys):
    out = tmp_path / "f6.png"
    code, meta, _ = run_figure(
        capsys, "--id", "F6", "--records", inputs / "wax_records.csv",
        "--points", "2", "--bins", "8", "--out", out,
    )
    assert code == 0 and out.stat().st_size > 0


def test_f3_single_point_summary(tmp_path, capsys):
    # one marker plus bound lines; no crossing to annotate
    path = tmp_path / "one.csv"
    path.write_text(
        "point_index,model,N,R_km,rho,mean_C,median_C,mean_ratio,bound_exact,bound_asymptotic\n"
        "0,waxman,100,800.0,3.9e-05,0.02,0.01,0.2,0.16,0.17\n"
    )
    out = tmp_path / "f3_one.png"
    code, meta, _ = run_figure(capsys, "--id", "F3", "--summary", path, "--out", out)
    assert code == 0 and out.stat().st_size > 0
    assert meta["rho_c"] is None


def test_f7_mean_vs_median(inputs, tmp_path, capsys):
    out = tmp_path / "f7.png"
    code, _, _ = run_figure(
        capsys, "--id", "F7", "--summary", inputs / "wax_summary.csv", "--out", out,
    )
    assert code == 0 and out.stat().st_size > 0


def test_f8_bound_convergence(inputs, tmp_path, capsys):
    out = tmp_path / "f8.png"
    code, meta, _ = run_figure(
        capsys, "--id", "F8", "--bounds", inputs / "bounds.jsonl", "--out", out,
    )
    assert code == 0 and out.stat().st_size > 0
    assert meta["regions"] == [400.0, 800.0, 2000.0]


# --- error paths -------------------------------------------------------------

def test_missing_input_flag_is_named(tmp_path, capsys):
    code, _, err = run_figure(capsys, "--id", "F3", "--out", tmp_path / "x.png")
    assert code == 1
    assert "--summary" in err


def test_empty_records_file_rejected(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code, _, err = run_figure(
        capsys, "--id", "F2", "--records", empty, "--out", tmp_path / "x.png",
    )
    assert code == 1
    assert "empty" in err


def test_missing_column_is_named(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("rho,foo\n1,2\n")
    code, _, err = run_figure(
        capsys, "--id", "F3", "--summary", bad, "--out", tmp_path / "x.png",
    )
    assert code == 1
    assert "mean_C" in err


def test_unknown_point_index_rejected(inputs, tmp_path, capsys):
    code, _, err = run_figure(
        capsys, "--id", "F2", "--records", inputs / "wax_records.csv",
        "--points", "99", "--out", tmp_path / "x.png",
    )
    assert code == 1
    assert "99" in err


# --- secondary acceptance (B1) --------------------------------------------------

def test_b1_panels_from_acceptance_csvs(inputs, tmp_path, capsys):
    """F1/F2/F3/F4 panels render from the acceptance-run CSVs (when the
    primary acceptance suite has produced them) and the transition
    figure's crossing marker agrees with the sweep fitter."""
    wax_summary = ACCEPTANCE_DIR / "waxman_summary.csv"
    wax_records = ACCEPTANCE_DIR / "waxman_records.csv"
    sf_summary = ACCEPTANCE_DIR / "scale_free_summary.csv"
    er_summaries = sorted(ACCEPTANCE_DIR.glob("er_alpha*_summary.csv"))
    if not (wax_summary.exists() and wax_records.exists()):
        wax_summary, wax_records = inputs / "wax_summary.csv", inputs / "wax_records.csv"
        er_summaries = [inputs / "er1_summary.csv", inputs / "er05_summary.csv"]
    if not sf_summary.exists():
        sf_summary = inputs / "sf_summary.csv"

    code, _, _ = run_figure(
        capsys, "--id", "F1", "--hist", inputs / "hist.csv",
        "--survival", inputs / "surv.csv", "--out", tmp_path / "b1_f1.png",
    )
    assert code == 0

    code, _, _ = run_figure(
        capsys, "--id", "F2", "--records", wax_records, "--out", tmp_path / "b1_f2.png",
    )
    assert code == 0

    argv = ["--id", "F3", "--summary", wax_summary, "--out", tmp_path / "b1_f3.png"]
    for er in er_summaries:
        argv += ["--er-summary", er]
    code, meta, _ = run_figure(capsys, *argv)
    assert code == 0
    fit = qnetcap("fit", "--summary", wax_summary, "--level", "1.0")
    assert meta["rho_c"] == pytest.approx(fit["rho_c"], rel=1e-9)

    code, _, _ = run_figure(
        capsys, "--id", "F4", "--summary", sf_summary, "--out", tmp_path / "b1_f4.png",
    )
    assert code == 0
    for name in ("b1_f1.png", "b1_f2.png", "b1_f3.png", "b1_f4.png"):
        assert (tmp_path / name).stat().st_size > 0
