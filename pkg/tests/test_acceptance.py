"""Acceptance criteria. Each test records one PASS/FAIL line for the terminal summary.

Scenario choices not pinned by the criteria themselves:
  * Welsh start: half the population speaks Welsh (init_frac_a = 0.5).
  * Telecom start: 4% per company, 92% unsubscribed (roughly the 2000 mobile
    penetration in the Philippines); horizon 50 steps.
  * Seeds: range(30) for ensembles, range(10) for network validation.
"""

import filecmp
import time

import mpmath
import numpy as np
import pytest

from conftest import ring_clustering
from swcompete.calibrate import Axis, SearchSpace, fit, synthetic_series
from swcompete.cli import main
from swcompete.dynamics import Group, ModelParams, homophily, run, transition_probability
from swcompete.graph import (
    Graph,
    WsConfig,
    build_ring_lattice,
    characteristic_path_length,
    clustering_coefficient,
    watts_strogatz,
)
from swcompete.rng import dynamics_stream

pytestmark = pytest.mark.slow

FULL_WS = WsConfig(5000, 14, 0.01)
SEEDS = range(30)
WELSH = ModelParams(alpha=0.9, gamma=0.2, s_a=0.1, complement=True, init_frac_a=0.5, init_frac_b=0.5)
TELECOM = ModelParams(alpha=0.99, gamma=0.1, s_a=0.502, s_b=0.498, init_frac_a=0.04, init_frac_b=0.04)


def ws(seed, k=14):
    return watts_strogatz(WsConfig(5000, k, 0.01, seed))


@pytest.fixture(scope="module")
def ws_metrics():
    start = time.perf_counter()
    lengths, clusterings = [], []
    for seed in range(10):
        g = ws(seed)
        lengths.append(characteristic_path_length(g).mean)
        clusterings.append(clustering_coefficient(g))
    return np.mean(lengths), np.mean(clusterings), time.perf_counter() - start


def test_ws_path_length_in_reported_range(ws_metrics, report):
    mean_l, _, elapsed = ws_metrics
    ok = 5.0 <= mean_l <= 7.0 and elapsed < 60
    # 14 neighbours per side (28 total) as a sensitivity reading of k_WS, informational only
    alt = np.mean([characteristic_path_length(ws(s, 28)).mean for s in range(3)])
    report(
        "WS validation: mean path length in [5, 7]",
        ok,
        f"L = {mean_l:.3f} over 10 seeds ({elapsed:.1f} s); with 28 ring neighbours L = {alt:.3f}",
    )
    assert ok, f"mean characteristic path length {mean_l:.3f} outside [5, 7]"


def test_ws_clustering(ws_metrics, report):
    _, mean_c, elapsed = ws_metrics
    ok = mean_c >= 0.6 and elapsed < 60
    report("WS validation: mean clustering >= 0.6, < 60 s", ok, f"C = {mean_c:.4f} ({elapsed:.1f} s)")
    assert ok


def test_lattice_analytics(report):
    errors = {}
    for k in (4, 6, 14):
        g = build_ring_lattice(WsConfig(5000, k))
        errors[k] = abs(clustering_coefficient(g) - ring_clustering(k))
    six = characteristic_path_length(Graph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)])).mean
    ok = all(e <= 1e-12 for e in errors.values()) and six == 1.8
    report("lattice analytics", ok, f"|C - 3(k-2)/4(k-1)| = {max(errors.values()):.1e}; 6-cycle L = {six!r}")
    assert ok


def test_transition_law(report):
    star = Graph.from_edges(5, [(0, i) for i in range(1, 5)])
    a_leaves = np.array([Group.A] * 5, dtype=np.int8)
    b_center = np.array([Group.B] + [Group.A] * 4, dtype=np.int8)
    path3 = Graph.from_edges(3, [(0, 1), (0, 2)])
    half = np.array([Group.A, Group.A, Group.B], dtype=np.int8)

    zero = transition_probability(0, Group.B, star, a_leaves, ModelParams(alpha=0.7, gamma=0.3, s_a=0.5))
    ident = transition_probability(0, Group.B, path3, half, ModelParams(alpha=1, gamma=0, s_a=0.5, s_b=0.5))
    welsh = transition_probability(0, Group.A, star, b_center, ModelParams(alpha=0.9, gamma=0.2, s_a=0.1, s_b=0.9))
    oracle = float(mpmath.power(mpmath.mpf("0.1"), mpmath.mpf("0.2")))
    examples_ok = abs(zero) <= 1e-12 and abs(ident - 0.5) <= 1e-12 and abs(welsh - oracle) <= 1e-12

    # 10^6 updates in two regimes; gamma = 0 makes the unassigned status factor 0^0 = 1
    into_u, updates = 0, 0
    for params in (TELECOM, ModelParams(alpha=0.5, gamma=0.0, s_a=0.5, s_b=0.5, init_frac_a=0.02, init_frac_b=0.02)):
        traj = run(ws(0), params, 100, dynamics_stream(0))
        into_u += int(traj.transitions[:, Group.U].sum())
        updates += 100 * FULL_WS.n
    ok = examples_ok and into_u == 0 and updates >= 10**6
    report(
        "transition law",
        ok,
        f"examples {zero}, {ident}, {welsh:.15f} (oracle {oracle:.15f}); "
        f"{into_u} moves into U over {updates} updates",
    )
    assert ok


def test_welsh_decline(report):
    start = time.perf_counter()
    fa = [run(ws(s), WELSH, 85, dynamics_stream(s)).fractions[:, 0] for s in SEEDS]
    elapsed = time.perf_counter() - start
    mean = np.mean(fa, axis=0)
    window = mean[5:]  # 80 recorded steps after step 5
    violations = int(np.count_nonzero(np.diff(window) >= 0))
    first_flat = int(np.argmax(np.diff(window) >= 0)) + 5 if violations else None
    ok = violations <= 2 and mean[-1] < 0.8 * mean[0] and elapsed < 300
    report(
        "Welsh decline",
        ok,
        f"f_a {mean[0]:.3f} -> {mean[-1]:.5f}; {violations} non-decreasing steps in 80 "
        f"(first at step {first_flat}); {elapsed:.1f} s",
    )
    assert ok


@pytest.fixture(scope="module")
def telecom_runs():
    start = time.perf_counter()
    fractions, h0, h50, assigned0, assigned50 = [], [], [], [], []
    for s in SEEDS:
        g = ws(s)
        traj = run(g, TELECOM, 50, dynamics_stream(s), snapshot_every=50)
        fractions.append(traj.fractions)
        h0.append(homophily(g, traj.snapshots[0]))
        h50.append(homophily(g, traj.snapshots[50]))
        assigned0.append(_assigned_homophily(g, traj.snapshots[0]))
        assigned50.append(_assigned_homophily(g, traj.snapshots[50]))
    return dict(
        mean=np.mean(fractions, axis=0),
        h0=np.mean(h0),
        h50=np.mean(h50),
        assigned=(np.mean(assigned0), np.mean(assigned50)),
        elapsed=time.perf_counter() - start,
    )


def _assigned_homophily(g, states):
    src = np.repeat(np.arange(g.n), g.degrees)
    both = (states[src] != Group.U) & (states[g.indices] != Group.U)
    return np.count_nonzero(both & (states[src] == states[g.indices])) / max(1, np.count_nonzero(both))


def test_telecom_competition(telecom_runs, report):
    m = telecom_runs["mean"]
    u_monotone = bool(np.all(np.diff(m[:, 2]) <= 0))
    sc_ahead = m[-1, 0] >= m[-1, 1]
    both_grow = m[-1, 0] > m[0, 0] and m[-1, 1] > m[0, 1]
    ok = u_monotone and sc_ahead and both_grow and telecom_runs["elapsed"] < 300
    report(
        "telecom competition",
        ok,
        f"U {m[0, 2]:.2f} -> {m[-1, 2]:.4f} (non-increasing: {u_monotone}); "
        f"terminal SC {m[-1, 0]:.4f} vs GT {m[-1, 1]:.4f}; {telecom_runs['elapsed']:.1f} s",
    )
    assert ok


def test_homophily_emergence(telecom_runs, report):
    gain = telecom_runs["h50"] - telecom_runs["h0"]
    a0, a50 = telecom_runs["assigned"]
    ok = gain >= 0.05
    report(
        "homophily emergence",
        ok,
        f"h(0) = {telecom_runs['h0']:.4f}, h(50) = {telecom_runs['h50']:.4f}, gain {gain:+.4f}; "
        f"among assigned agents only {a0:.4f} -> {a50:.4f}",
    )
    assert ok


def test_calibration_self_recovery(report):
    start = time.perf_counter()
    generator = (0.9, 0.2, 0.1)
    data = synthetic_series(
        FULL_WS,
        ModelParams(alpha=0.9, gamma=0.2, s_a=0.1, complement=True),
        np.arange(1900, 1981, 10),
        0.25,
        range(1000, 1030),
    )
    space = SearchSpace(
        alpha=Axis(0.5, 1.3, 5),
        gamma=Axis(0.1, 0.3, 5),
        s_a=Axis(0.06, 0.14, 5),
        complement=True,
        steps_per_year=0.25,
    )
    first = fit(data, FULL_WS, space, ensemble_size=30, seeds=0)
    second = fit(data, FULL_WS, space, ensemble_size=30, seeds=0)
    elapsed = time.perf_counter() - start

    axes = (space.alpha, space.gamma, space.s_a)
    coarse_ok = all(abs(c - g) < 1e-9 for c, g in zip(first.coarse_best, generator))
    cell_ok = all(abs(b - g) <= ax.spacing / 2 + 1e-12 for b, g, ax in zip(first.best, generator, axes))
    same = first.surface == second.surface and first.best == second.best and first.loss == second.loss
    ok = coarse_ok and cell_ok and same and elapsed < 1800
    report(
        "calibration self-recovery",
        ok,
        f"coarse {tuple(round(v, 4) for v in first.coarse_best[:3])}, "
        f"refined {tuple(round(v, 4) for v in first.best[:3])}, loss {first.loss:.5f}; "
        f"repeat identical: {same}; {elapsed:.0f} s",
    )
    assert ok


def test_manifest_reproducibility(tmp_path, report):
    runs = {
        "simulate": "simulate --alpha 0.9 --gamma 0.2 --s-a 0.1 --complement --t-max 40 --seed 42 "
                    "--snapshot-every 20 --plot",
        "ensemble": "ensemble --n 2000 --alpha 0.99 --gamma 0.1 --s-a 0.502 --s-b 0.498 "
                    "--init-frac-a 0.04 --init-frac-b 0.04 --t-max 30 --seeds 0:5",
        "netstat": "netstat --n 2000 --seed 3 --export",
    }
    compared, mismatched, kinds = 0, [], set()
    for name, argv in runs.items():
        first, second = tmp_path / f"{name}-1", tmp_path / f"{name}-2"
        assert main(argv.split() + ["--out", str(first)]) == 0
        assert main(["--config", str(first / "manifest.txt"), "--out", str(second)]) == 0
        files = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
        produced = sorted(p.relative_to(second) for p in second.rglob("*") if p.is_file())
        if files != produced:
            mismatched.append(f"{name}: file sets differ")
        for rel in files:
            compared += 1
            if not filecmp.cmp(first / rel, second / rel, shallow=False):
                mismatched.append(f"{name}/{rel}")
        kinds.update(rel.suffix for rel in files)
    ok = not mismatched and {".csv", ".svg", ".graphml"} <= kinds
    report("manifest reproducibility", ok, f"{compared} files compared ({', '.join(sorted(kinds))}); mismatches: {mismatched or 'none'}")
    assert ok
