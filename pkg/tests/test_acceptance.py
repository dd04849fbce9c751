"""Acceptance criteria.

Each test prints one PASS/FAIL line (run pytest with -s to watch them live).
Tolerances are pinned here, not configurable. The expensive shared
computations (the radius sweep and the 20 adaptive table runs) are
module-scoped fixtures.
"""
import json
import math
import time

import numpy as np
import pytest

from flocklab import generators
from flocklab.analysis import (
    cluster_count,
    cluster_sizes,
    diameter,
    e_matrix,
    flocking_detector,
    fluctuation_norm,
    log_slope,
    min_similarity_series,
    row_dominance_margin,
    two_body_classify,
)
from flocklab.dynamics import (
    CouplingMatrix,
    ModelParams,
    ParticleEnsemble,
    integrate,
)
from flocklab.graphs import WeightedDigraph, constant_temporal, is_neighbor_connected
from flocklab.presets import (
    arc_initial_data,
    assumption_b_graph,
    draw_two_body_instance,
    simulate_two_body_outcome,
    table_initial_data,
)
from flocklab.scenario import ScenarioConfig, cluster_report, run_scenario, scenario_rng

DT = 1e-3


def report(criterion: str, ok: bool, note: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    suffix = f"  ({note})" if note else ""
    print(f"ACCEPTANCE {criterion}: {verdict}{suffix}")
    assert ok, f"{criterion} failed{suffix}"


DELTA_TABLE = [
    (60, 30, 30, 326.0, 1.2469e-4),
    (60, 30, 45, 365.0, 9.6546e-5),
    (60, 30, 58, 396.0, 1.2901e-4),
    (60, 38, 38, 101.0, 0.0029),
]


def test_a01_margin_table_reproduction():
    started = time.perf_counter()
    worst = 0.0
    for n, n_min, n_max, ratio, expected in DELTA_TABLE:
        delta, _ = generators.assumption_b_margin(n, n_min, n_max, ratio)
        worst = max(worst, abs(delta - expected) / expected)
    elapsed = time.perf_counter() - started
    report("A01 margin-table", worst <= 0.01 and elapsed < 1.0,
           f"worst rel err {worst:.3%}, {elapsed * 1e3:.1f} ms")


def test_a02_complete_graph_envelope():
    started = time.perf_counter()
    n = 60
    alpha = 1.0 / n
    w = np.full((n, n), alpha)
    np.fill_diagonal(w, 0.0)
    rng = scenario_rng(2024)
    x0 = rng.uniform(0.0, 100.0, size=(n, 1))
    traj = integrate(ModelParams("laplacian"),
                     ParticleEnsemble(x0, np.zeros_like(x0)),
                     horizon_t=10.0, dt=DT, sample_every=10,
                     temporal_graph=constant_temporal(WeightedDigraph(w)))
    f0 = fluctuation_norm(x0)
    rate = alpha * n  # = 1
    worst = 0.0
    for s in range(traj.n_samples):
        bound = f0 * math.exp(-rate * traj.times[s]) * (1.0 + 1e-6)
        worst = max(worst, fluctuation_norm(traj.positions[s]) / bound)
    drift = abs(traj.positions[-1].mean() - x0.mean())
    elapsed = time.perf_counter() - started
    report("A02 complete-envelope",
           worst <= 1.0 and drift <= 1e-8 and elapsed < 10.0,
           f"max ratio {worst:.9f}, mean drift {drift:.2e}, {elapsed:.2f} s")


def test_a03_neighbor_connected_rate():
    rng = scenario_rng(7)
    x0 = rng.uniform(0.0, 100.0, size=(60, 1))
    state = ParticleEnsemble(x0, np.zeros_like(x0))
    results = []
    for tag, graph, horizon in (
        ("one_leader", generators.one_leader(60, 1.0), 20.0),
        ("three_group", generators.three_group_directed((20, 20, 20), 1.0), 2.0),
    ):
        started = time.perf_counter()
        traj = integrate(ModelParams("laplacian"), state, horizon, DT,
                         sample_every=10,
                         temporal_graph=constant_temporal(graph))
        series = [diameter(traj.positions[s]) for s in range(traj.n_samples)]
        slope = log_slope(traj.times, series)
        elapsed = time.perf_counter() - started
        results.append((tag, slope, elapsed))
    ok = all(slope <= -1.0 + 0.05 and elapsed < 30.0
             for _, slope, elapsed in results)
    report("A03 neighbor-connected-rate", ok,
           ", ".join(f"{t} slope {s:.3f} in {e:.1f}s" for t, s, e in results))


def test_a04_row_dominance_floor():
    failures = []
    for n in (5, 10, 60):
        cases = {
            "one_leader": generators.one_leader(n, 1.0),
            "three_group": generators.three_group_directed(
                (n - 2 * (n // 3), n // 3, n // 3), 1.0),
        }
        if n >= 3:
            cases["two_leaders"] = generators.two_leaders(n, 1.0)
        for tag, g in cases.items():
            margin = row_dominance_margin(e_matrix(g))
            if margin < 2.0 - 1e-9:
                failures.append((tag, n, margin))
    rng = np.random.default_rng(99)
    accepted = 0
    while accepted < 200:
        size = int(rng.integers(4, 9))
        w_m = float(rng.uniform(0.5, 2.0))
        mask = rng.random((size, size)) < rng.uniform(0.15, 0.9)
        np.fill_diagonal(mask, False)
        weights = rng.uniform(w_m, 2.0 * w_m, size=(size, size)) * mask
        g = WeightedDigraph(weights)
        if not is_neighbor_connected(g).holds:
            continue
        accepted += 1
        margin = row_dominance_margin(e_matrix(g))
        if margin < 2.0 * w_m - 1e-9:
            failures.append(("random", size, margin))
    report("A04 row-dominance", not failures,
           f"{accepted} random graphs, failures: {failures[:3]}")


def test_a05_assumption_b_envelope():
    rng = scenario_rng(11)
    x0 = rng.uniform(0.0, 100.0, size=(60, 1))
    state = ParticleEnsemble(x0, np.zeros_like(x0))
    f0 = fluctuation_norm(x0)
    notes = []
    ok = True
    for idx, (n, n_min, n_max, ratio, _) in enumerate(DELTA_TABLE):
        started = time.perf_counter()
        family = "circulant" if n_min == n_max else "cliques"
        base = assumption_b_graph(n, n_min, n_max, family, 1.0)
        g = generators.perturb_weights(base, 1.0, 1.0 / ratio, seed=idx)
        delta, _ = generators.assumption_b_margin(n, n_min, n_max, ratio)
        rate = 1.0 * delta / (ratio * n)
        traj = integrate(ModelParams("laplacian"), state, 100.0, DT,
                         sample_every=100,
                         temporal_graph=constant_temporal(g))
        worst = 0.0
        for s in range(traj.n_samples):
            bound = f0 * math.exp(-rate * traj.times[s]) * (1.0 + 1e-6)
            worst = max(worst, fluctuation_norm(traj.positions[s]) / bound)
        elapsed = time.perf_counter() - started
        ok = ok and worst <= 1.0 and elapsed < 60.0
        notes.append(f"({n_min},{n_max}) ratio {worst:.6f} in {elapsed:.1f}s")
    report("A05 assumption-b-envelope", ok, "; ".join(notes))


def test_a06_two_body_soundness():
    d = 1.0
    kappa = 1.0
    definite = 0
    mismatches = []
    idx = 0
    while definite < 110 and idx < 600:
        rng = scenario_rng(31337, stream=idx + 1)
        idx += 1
        x1, x2, v1, v2 = draw_two_body_instance(rng)
        verdict = two_body_classify(x1, x2, v1, v2, kappa, d)
        if verdict.verdict == "indeterminate":
            continue
        definite += 1
        outcome, traj = simulate_two_body_outcome(x1, x2, v1, v2, kappa, d,
                                                  200.0, DT)
        if outcome != verdict.verdict:
            mismatches.append((idx - 1, verdict.verdict, outcome))
    report("A06 two-body", definite >= 100 and not mismatches,
           f"{definite} definite verdicts, mismatches: {mismatches[:3]}")


@pytest.fixture(scope="module")
def sec53_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sec53")
    started = time.perf_counter()
    run_scenario(ScenarioConfig(name="sec53_radius_sweep", seed=0,
                                out_dir=str(out)))
    elapsed = time.perf_counter() - started
    summary = json.loads((out / "summary.json").read_text())
    return summary["sweep"], elapsed


def test_a07a_sweep_monotone(sec53_sweep):
    rows, elapsed = sec53_sweep
    counts = [r["clusters"] for r in rows]
    ok = all(b <= a for a, b in zip(counts, counts[1:])) and elapsed < 300.0
    report("A07a sweep-monotone", ok,
           f"counts {counts}, sweep took {elapsed:.0f}s")


def test_a07b_mono_cluster_threshold(sec53_sweep):
    rows, _ = sec53_sweep
    bad = [r["d"] for r in rows if r["d"] >= 0.57 and r["clusters"] != 1]
    report("A07b mono-threshold", not bad, f"non-mono radii: {bad}")


def test_a07c_three_clusters_plus_ten(sec53_sweep):
    rows, _ = sec53_sweep
    row = next(r for r in rows if abs(r["d"] - 0.56) < 1e-12)
    ok = row["major_clusters"] == 3 and row["singletons"] == 10
    report("A07c split-structure", ok,
           f"d=0.56 gave {row['major_clusters']} major + "
           f"{row['singletons']} singletons ({row['clusters']} components)")


def test_a07d_velocity_deviation_bands(sec53_sweep):
    rows, _ = sec53_sweep
    bad = []
    for r in rows:
        v = r["velocity_deviation_probe"]
        if r["d"] >= 0.60 and not v < 1e-3:
            bad.append((r["d"], v))
        if 0.57 <= r["d"] < 0.60 and not v > 1e-3:
            bad.append((r["d"], v))
    report("A07d velocity-deviation-bands", not bad, f"violations: {bad}")


@pytest.fixture(scope="module")
def adaptive_table_runs():
    """20 seeded adaptive table runs, reduced to what the criteria consume."""
    results = []
    for seed in range(20):
        state, coupling = table_initial_data(seed)
        traj = integrate(ModelParams("adaptive_cs", radius_d=1.0,
                                     kappa_global=1.0, epsilon=1.0),
                         state, 300.0, DT, sample_every=100, coupling=coupling)
        results.append({
            "seed": seed,
            "kappa_range": traj.kappa_range,
            "report": cluster_report(traj, 300.0, 1.0),
        })
    return results


def test_a08a_coupling_bounds(adaptive_table_runs):
    bad = [(r["seed"], r["kappa_range"]) for r in adaptive_table_runs
           if r["kappa_range"][0] < -1.0 - 1e-9 or r["kappa_range"][1] > 1.0 + 1e-9]
    lo = min(r["kappa_range"][0] for r in adaptive_table_runs)
    hi = max(r["kappa_range"][1] for r in adaptive_table_runs)
    report("A08a coupling-bounds", not bad,
           f"20 runs, coupling range [{lo:.12f}, {hi:.12f}]")


def test_a08b_similarity_floor():
    worst = 0.0
    for seed in range(5):
        rng = scenario_rng(500 + seed)
        n = 8
        x0 = rng.uniform(-0.3, 0.3, size=(n, 2))
        angles = rng.uniform(-0.6, 0.6, size=n)
        speeds = rng.uniform(0.5, 1.5, size=n)
        v0 = np.stack([speeds * np.cos(angles), speeds * np.sin(angles)], axis=1)
        traj = integrate(ModelParams("singular_cs", radius_d=100.0),
                         ParticleEnsemble(x0, v0), 10.0, DT, sample_every=10)
        series = min_similarity_series(traj)
        assert series.values[0] > 0.0
        drop = float(np.max(np.maximum(-np.diff(series.values), 0.0), initial=0.0))
        worst = max(worst, drop)
    report("A08b similarity-floor", worst <= 1e-6,
           f"worst per-sample decrease {worst:.2e}")


def test_a09_full_connectivity_flocking():
    rng = scenario_rng(77)
    n, d = 8, 5.0
    x0 = rng.uniform(-0.5, 0.5, size=(n, 2))
    v0 = np.tile([1.0, 0.0], (n, 1)) + rng.uniform(-0.05, 0.05, size=(n, 2))
    norms = np.linalg.norm(v0, axis=1)
    a_m = float(np.min(np.clip((v0 @ v0.T) / np.outer(norms, norms), -1, 1)))
    v_fluct = float(np.linalg.norm(v0 - v0.mean(axis=0)))
    d0 = diameter(x0)
    assert d0 < d - 2.0 * v_fluct / a_m, "seeded data must satisfy the hypothesis"
    traj = integrate(ModelParams("singular_cs", radius_d=d),
                     ParticleEnsemble(x0, v0), 50.0, DT, sample_every=100)
    flocked = flocking_detector(traj, dist_bound=d, vel_tol=1e-6)
    always_connected = traj.max_pairwise_distance < d
    report("A09 full-connectivity-flocking", flocked and always_connected,
           f"max distance {traj.max_pairwise_distance:.3f} < d={d}, "
           f"a_m={a_m:.3f}")


def _angle_separation(a: float, b: float) -> float:
    return min(abs(a - b), 360.0 - abs(a - b))


def test_a10a_adaptive_multiclustering(adaptive_table_runs):
    good = 0
    details = []
    for r in adaptive_table_runs[:10]:
        majors = [(s, a) for s, a in r["report"] if s >= 2]
        separated = all(
            _angle_separation(a1, a2) >= 30.0
            for i, (_, a1) in enumerate(majors)
            for _, a2 in majors[i + 1:]
        )
        ok = len(majors) >= 2 and separated
        good += int(ok)
        details.append(f"seed {r['seed']}: {len(majors)} majors")
    report("A10a adaptive-clusters", good >= 7,
           f"{good}/10 seeds with >=2 separated major clusters")


def test_a10b_classical_mono_cluster(tmp_path):
    run_scenario(ScenarioConfig(name="tab_classical_cs", seed=0,
                                out_dir=str(tmp_path),
                                params={"d_values": (0.012,)}))
    summary = json.loads((tmp_path / "summary.json").read_text())
    case = summary["cases"][0]
    mono = len(case["clusters"]) == 1 and case["clusters"][0]["size"] == 60
    vdev = case["final_velocity_deviation"]
    report("A10b classical-mono", mono and vdev < 1e-4,
           f"clusters {case['clusters']}, final velocity deviation {vdev:.2e}")
