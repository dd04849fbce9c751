"""Preset experiment registry.

Each preset encodes one reproducible experiment family: model, graph,
initial-data law, horizon, sampling, and the files it emits. Seeds have
documented defaults; the randomized table experiments cannot be replayed
bit-for-bit against their original source (no published seeds), so they
assert structural outcomes and emit full data for visual comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import generators
from .analysis import (
    assumption_b_conservative_rate,
    cluster_count,
    cluster_sizes,
    diameter,
    envelope_rate,
    fluctuation_norm,
    log_slope,
    two_body_classify,
)
from .dynamics import (
    CouplingMatrix,
    ModelParams,
    ParticleEnsemble,
    TrajectoryRecord,
    integrate,
    neighborhood,
    similarity_matrix,
)
from .errors import ConfigInvalidError
from .graphs import PeriodicTemporal, WeightedDigraph, constant_temporal
from .scenario import (
    RunContext,
    ScenarioConfig,
    cluster_report,
    scenario_rng,
    write_matrix_csv,
    write_series_csv,
    write_trajectory_csv,
)


@dataclass
class Preset:
    """A named experiment with defaults and a runner."""

    name: str
    description: str
    detail: str
    horizon_t: float
    sample_every: int
    params: dict
    run_fn: Callable[[ScenarioConfig, RunContext, float, int, dict], None]

    def run(self, config: ScenarioConfig, ctx: RunContext) -> None:
        horizon = config.horizon_t if config.horizon_t is not None else self.horizon_t
        sample_every = config.sample_every if config.sample_every is not None \
            else self.sample_every
        params = {**self.params, **config.params}
        self.run_fn(config, ctx, horizon, sample_every, params)


_REGISTRY: dict = {}


def _register(name, description, detail, horizon_t, sample_every, params):
    def deco(fn):
        _REGISTRY[name] = Preset(name, description, detail, horizon_t,
                                 sample_every, params, fn)
        return fn
    return deco


def lookup(name: str) -> Preset:
    if name in _REGISTRY:
        return _REGISTRY[name]
    if name == "custom":
        return Preset("custom", "single run described entirely by params",
                      "see README for the custom-config schema",
                      1.0, 10, {}, _run_custom)
    raise ConfigInvalidError(f"unknown preset {name!r}")


def list_presets() -> list:
    """Stable registry listing: (name, description, detail)."""
    return [(p.name, p.description, p.detail)
            for _, p in sorted(_REGISTRY.items())]


def _tail_slope(times, values):
    try:
        return log_slope(times, values)
    except Exception:
        return None


def _diameter_series(traj: TrajectoryRecord) -> np.ndarray:
    return np.array([diameter(traj.positions[s]) for s in range(traj.n_samples)])


def _fluctuation_series(traj: TrajectoryRecord) -> np.ndarray:
    return np.array([fluctuation_norm(traj.positions[s])
                     for s in range(traj.n_samples)])


def _velocity_deviation_series(traj: TrajectoryRecord) -> np.ndarray:
    v = traj.velocities
    return np.array([float(np.linalg.norm(v[s] - v[s].mean(axis=0), axis=1).mean())
                     for s in range(traj.n_samples)])


def _write_cluster_report(path, report) -> None:
    lines = ["size,angle_deg"]
    lines += [f"{size},{angle!r}" for size, angle in report]
    from .scenario import _write_atomic
    _write_atomic(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Consensus decay on leader / three-group / bounded-asymmetry graphs
# ---------------------------------------------------------------------------

@_register(
    "fig3a_leaders",
    "diameter decay of linear consensus under fixed and switching leader graphs",
    "N=60 opinions drawn uniformly from [0, 100]; five variants (fixed one/two "
    "leaders, switching one/two leaders, mixed alternation) share the same "
    "initial data; emits one diameter series per variant plus the guaranteed "
    "exponential envelope",
    horizon_t=35.0, sample_every=10,
    params={"n": 60, "weight": 1.0, "low": 0.0, "high": 100.0, "period_steps": 10},
)
def _run_fig3a(config, ctx, horizon, sample_every, params):
    n = int(params["n"])
    weight = float(params["weight"])
    period = params["period_steps"] * config.dt
    rng = scenario_rng(config.seed)
    x0 = rng.uniform(params["low"], params["high"], size=(n, 1))
    state = ParticleEnsemble(x0, np.zeros_like(x0))
    variants = [
        ("fixed_one", "FixedOne"),
        ("fixed_two", "FixedTwo"),
        ("switching_one", "SwitchingOne"),
        ("switching_two", "SwitchingTwo"),
        ("mixed", "MixedOneTwo"),
    ]
    init_diam = diameter(x0)
    times = None
    for idx, (tag, mode) in enumerate(variants):
        sched = generators.LeaderSchedule(mode, period=period,
                                          seed=config.seed + idx)
        tg = generators.leader_temporal(n, weight, sched, horizon=horizon)
        traj = integrate(ModelParams("laplacian"), state, horizon, config.dt,
                         sample_every=sample_every, temporal_graph=tg)
        series = _diameter_series(traj)
        slope = _tail_slope(traj.times, series)
        ctx.add_metric(f"diameter_{tag}", traj.times, series,
                       log_slope=slope, envelope_rate=weight,
                       envelope_satisfied=(slope is not None
                                           and slope <= -weight + 0.05))
        times = traj.times
    envelope = init_diam * np.exp(-weight * times)
    ctx.add_metric("envelope", times, envelope, envelope_rate=weight)
    ctx.summary["envelope_constant"] = init_diam
    ctx.summary["note"] = ("envelope constant C is the initial diameter; "
                           "switching period and leader redraw law are "
                           "config choices, period_steps * dt")


@_register(
    "fig3b_threegroup",
    "diameter decay of linear consensus on fixed and repartitioned three-group digraphs",
    "N=60 opinions from [0, 100]; the fixed variant uses groups (20, 20, 20); "
    "the temporal variant redraws a uniform partition into three nonempty "
    "groups every period",
    horizon_t=5.0, sample_every=10,
    params={"n": 60, "weight": 1.0, "sizes": (20, 20, 20), "period_steps": 10},
)
def _run_fig3b(config, ctx, horizon, sample_every, params):
    n = int(params["n"])
    weight = float(params["weight"])
    rng = scenario_rng(config.seed)
    x0 = rng.uniform(0.0, 100.0, size=(n, 1))
    state = ParticleEnsemble(x0, np.zeros_like(x0))
    fixed = constant_temporal(
        generators.three_group_directed(tuple(params["sizes"]), weight))
    temporal = generators.three_group_temporal(
        n, weight, params["period_steps"] * config.dt, seed=config.seed)
    times = None
    for tag, tg in (("fixed", fixed), ("temporal", temporal)):
        traj = integrate(ModelParams("laplacian"), state, horizon, config.dt,
                         sample_every=sample_every, temporal_graph=tg)
        series = _diameter_series(traj)
        slope = _tail_slope(traj.times, series)
        ctx.add_metric(f"diameter_{tag}", traj.times, series,
                       log_slope=slope, envelope_rate=weight,
                       envelope_satisfied=(slope is not None
                                           and slope <= -weight + 0.05))
        times = traj.times
    ctx.add_metric("envelope", times, diameter(x0) * np.exp(-weight * times),
                   envelope_rate=weight)


ASSUMPTION_B_CONFIGS = (
    # (n_min, n_max, family, ratio)
    (30, 30, "circulant", 326.0),
    (30, 45, "cliques", 365.0),
    (30, 58, "cliques", 396.0),
    (38, 38, "circulant", 101.0),
)


def assumption_b_graph(n, n_min, n_max, family, gamma_m):
    if family == "circulant":
        return generators.circulant_regular(n, n_min, gamma_m)
    if family == "cliques":
        return generators.overlapping_cliques(n, n_min, n_max, gamma_m)
    raise ConfigInvalidError(f"unknown graph family {family!r}")


@_register(
    "fig3c_assumptionB",
    "fluctuation-norm decay on bounded-asymmetry graphs with perturbed weights",
    "N=60 opinions from [0, 100]; four neighbor-count configurations "
    "(30,30), (30,45), (30,58), (38,38) with weights re-perturbed around the "
    "floor every period; emits fluctuation-norm series and both guaranteed "
    "decay rates per configuration",
    horizon_t=4.0, sample_every=10,
    params={"n": 60, "gamma_m": 1.0, "period_steps": 10},
)
def _run_fig3c(config, ctx, horizon, sample_every, params):
    n = int(params["n"])
    gamma_m = float(params["gamma_m"])
    rng = scenario_rng(config.seed)
    x0 = rng.uniform(0.0, 100.0, size=(n, 1))
    state = ParticleEnsemble(x0, np.zeros_like(x0))
    init_norm = fluctuation_norm(x0)
    configs = params.get("configs", ASSUMPTION_B_CONFIGS)
    period = params["period_steps"] * config.dt
    ctx.summary["configs"] = []
    for idx, (n_min, n_max, family, ratio) in enumerate(configs):
        base = assumption_b_graph(n, n_min, n_max, family, gamma_m)
        epsilon = gamma_m / ratio

        def build(piece, _base=base, _eps=epsilon):
            return generators.perturb_weights(
                _base, gamma_m, _eps, seed=config.seed + 7919 * (piece + 1))

        tg = PeriodicTemporal(period, build)
        traj = integrate(ModelParams("laplacian"), state, horizon, config.dt,
                         sample_every=sample_every, temporal_graph=tg)
        series = _fluctuation_series(traj)
        delta, _ = generators.assumption_b_margin(n, n_min, n_max, ratio)
        stated = envelope_rate("AssumptionB", {"gamma_m": gamma_m,
                                               "delta": delta,
                                               "n_vertices": n})
        conservative = assumption_b_conservative_rate(gamma_m, delta, ratio, n)
        tag = f"{n_min}_{n_max}"
        bound = init_norm * np.exp(-conservative * traj.times)
        satisfied = bool(np.all(series <= bound * (1.0 + 1e-6)))
        ctx.add_metric(f"fluctuation_{tag}", traj.times, series,
                       log_slope=_tail_slope(traj.times, series),
                       envelope_rate=conservative, envelope_satisfied=satisfied)
        write_series_csv(ctx.path(f"envelope_{tag}.csv"), traj.times,
                         init_norm * np.exp(-stated * traj.times))
        ctx.summary["configs"].append({
            "n_min": n_min, "n_max": n_max, "family": family, "ratio": ratio,
            "delta": delta, "stated_rate": stated,
            "conservative_rate": conservative,
        })


# ---------------------------------------------------------------------------
# Adaptive and classical alignment tables
# ---------------------------------------------------------------------------

def table_initial_data(seed: int, n: int = 60):
    """Shared initial data of the table experiments: all agents at the
    origin, tiny 2-D velocities, symmetric couplings in [-0.5, 0.5]."""
    rng_v = scenario_rng(seed, stream=1)
    rng_k = scenario_rng(seed, stream=2)
    x0 = np.zeros((n, 2))
    v0 = rng_v.uniform(-0.01, 0.01, size=(n, 2))
    upper = rng_k.uniform(-0.5, 0.5, size=(n, n))
    kappa0 = np.triu(upper)
    kappa0 = kappa0 + np.triu(kappa0, 1).T
    return ParticleEnsemble(x0, v0), CouplingMatrix(kappa0)


@_register(
    "tab_adaptive_cs",
    "adaptive alignment run: cluster formation from co-evolving couplings",
    "N=60 agents start at the origin with velocities from [-0.01, 0.01]^2 and "
    "symmetric couplings from [-0.5, 0.5]; radius 1, horizon 300; emits "
    "velocity-deviation and diameter series, the final coupling matrix, and "
    "a cluster report (size, polar angle) at the final time",
    horizon_t=300.0, sample_every=100,
    params={"n": 60, "radius_d": 1.0, "kappa_global": 1.0, "epsilon": 1.0},
)
def _run_tab_adaptive(config, ctx, horizon, sample_every, params):
    state, coupling = table_initial_data(config.seed, int(params["n"]))
    model = ModelParams("adaptive_cs", radius_d=float(params["radius_d"]),
                        kappa_global=float(params["kappa_global"]),
                        epsilon=float(params["epsilon"]))
    traj = integrate(model, state, horizon, config.dt,
                     sample_every=sample_every, coupling=coupling)
    ctx.add_metric("velocity_deviation", traj.times,
                   _velocity_deviation_series(traj))
    ctx.add_metric("diameter", traj.times, _diameter_series(traj))
    report = cluster_report(traj, traj.times[-1], model.radius_d)
    _write_cluster_report(ctx.path("cluster_report.csv"), report)
    write_matrix_csv(ctx.path("kappa_final.csv"), traj.final_kappa)
    ctx.summary["kappa_range"] = list(traj.kappa_range)
    ctx.summary["clusters"] = [{"size": s, "angle_deg": a} for s, a in report]
    if "trajectory" in params.get("outputs", ()):
        write_trajectory_csv(ctx.path("trajectory.csv"), traj)


@_register(
    "tab_classical_cs",
    "distance-kernel alignment runs over several interaction radii",
    "same initial data as the adaptive table runs; the model uses the "
    "bounded-confidence kernel (1 + r^2)^(-1/2) with per-agent "
    "normalization; one run per radius in d_values, horizon 300",
    horizon_t=300.0, sample_every=100,
    params={"n": 60, "d_values": (0.009, 0.01, 0.012)},
)
def _run_tab_classical(config, ctx, horizon, sample_every, params):
    state, _ = table_initial_data(config.seed, int(params["n"]))
    ctx.summary["cases"] = []
    for d in params["d_values"]:
        model = ModelParams("classical_cs", radius_d=float(d))
        traj = integrate(model, state, horizon, config.dt,
                         sample_every=sample_every)
        tag = repr(float(d))
        ctx.add_metric(f"velocity_deviation_d{tag}", traj.times,
                       _velocity_deviation_series(traj))
        report = cluster_report(traj, traj.times[-1], float(d))
        ctx.summary["cases"].append({
            "d": float(d),
            "clusters": [{"size": s, "angle_deg": a} for s, a in report],
            "final_velocity_deviation":
                float(_velocity_deviation_series(traj)[-1]),
        })


@_register(
    "fig_snapshots",
    "velocity-angle and coupling/distance snapshots along one table run",
    "runs the adaptive (default) or classical model on the table initial "
    "data and emits per-stamp velocity polar angles, plus coupling matrices "
    "(adaptive) or radius-log distance matrices (classical) at each stamp",
    horizon_t=300.0, sample_every=1000,
    params={"n": 60, "model": "adaptive", "radius_d": None,
            "kappa_global": 1.0, "epsilon": 1.0,
            "times_adaptive": (0.0, 5.0, 10.0, 30.0, 50.0, 80.0, 300.0),
            "times_classical": (0.0, 2.0, 5.0, 10.0, 20.0, 80.0, 300.0)},
)
def _run_snapshots(config, ctx, horizon, sample_every, params):
    kind = params["model"]
    if kind not in ("adaptive", "classical"):
        raise ConfigInvalidError("snapshot model must be adaptive or classical")
    stamps = params["times_adaptive" if kind == "adaptive" else "times_classical"]
    stamps = sorted({min(float(t), horizon) for t in stamps} | {horizon})
    state, coupling = table_initial_data(config.seed, int(params["n"]))
    radius = params["radius_d"]
    radius = float(radius) if radius is not None else (1.0 if kind == "adaptive" else 0.009)
    # sample stride must land on every stamp
    steps = [int(round(t / config.dt)) for t in stamps if t > 0.0]
    stride = steps[0] if steps else 1
    for s in steps[1:]:
        stride = math.gcd(stride, s)
    stride = max(stride, 1)
    if kind == "adaptive":
        model = ModelParams("adaptive_cs", radius_d=radius,
                            kappa_global=float(params["kappa_global"]),
                            epsilon=float(params["epsilon"]))
        traj = integrate(model, state, horizon, config.dt, sample_every=stride,
                         coupling=coupling, record_kappa=True)
    else:
        model = ModelParams("classical_cs", radius_d=radius)
        traj = integrate(model, state, horizon, config.dt, sample_every=stride)
    ctx.summary["stamps"] = stamps
    ctx.summary["model"] = kind
    ctx.summary["radius_d"] = radius
    for t in stamps:
        s = traj.sample_index_at(t)
        v = traj.velocities[s]
        angles = np.degrees(np.arctan2(v[:, 1], v[:, 0])) % 360.0
        write_series_csv(ctx.path(f"angles_t{t:g}.csv"),
                         np.arange(len(angles), dtype=float), angles)
        if kind == "adaptive":
            write_matrix_csv(ctx.path(f"kappa_t{t:g}.csv"), traj.kappas[s])
        else:
            x = traj.positions[s]
            dist = np.linalg.norm(x[:, None] - x[None, :], axis=2)
            with np.errstate(divide="ignore"):
                logd = np.log(np.maximum(dist, 1e-300)) / np.log(radius)
            np.fill_diagonal(logd, np.log(1e-300) / np.log(radius))
            write_matrix_csv(ctx.path(f"logdist_t{t:g}.csv"), logd)
    ctx.add_metric("velocity_deviation", traj.times,
                   _velocity_deviation_series(traj))


# ---------------------------------------------------------------------------
# Radius sweeps of the fast-adaptation model
# ---------------------------------------------------------------------------

def arc_initial_data(n: int = 50, speed: float = 1.0 / 3.0) -> ParticleEnsemble:
    """Agents on the upper unit half-circle, velocities pointing inward."""
    theta = (np.arange(n) * math.pi) / (n - 1)
    x0 = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return ParticleEnsemble(x0, -speed * x0)


SEC53_RADII = tuple(round(0.50 + 0.01 * k, 2) for k in range(16))


@_register(
    "sec53_radius_sweep",
    "cluster count and velocity deviation of the fast-adaptation model vs radius",
    "N=50 agents on the upper unit half-circle with inward velocities of "
    "speed 1/3; one run per radius in d_values; reports the component count "
    "of the proximity graph at t=100 and the mean velocity deviation at t=30",
    horizon_t=100.0, sample_every=100,
    params={"n": 50, "d_values": SEC53_RADII, "kappa_global": 0.7,
            "probe_time": 30.0},
)
def _run_sec53_sweep(config, ctx, horizon, sample_every, params):
    state = arc_initial_data(int(params["n"]))
    probe = min(float(params["probe_time"]), horizon)
    rows = []
    for d in params["d_values"]:
        model = ModelParams("singular_cs", radius_d=float(d),
                            kappa_global=float(params["kappa_global"]))
        traj = integrate(model, state, horizon, config.dt,
                         sample_every=sample_every)
        count, labels = cluster_count(traj.positions[-1], float(d))
        sizes = cluster_sizes(labels)
        vdev = float(np.linalg.norm(
            traj.velocities[traj.sample_index_at(probe)]
            - traj.velocities[traj.sample_index_at(probe)].mean(axis=0),
            axis=1).mean())
        rows.append({
            "d": float(d),
            "clusters": int(count),
            "major_clusters": int((sizes >= 2).sum()),
            "singletons": int((sizes == 1).sum()),
            "velocity_deviation_probe": vdev,
        })
    ds = [r["d"] for r in rows]
    write_series_csv(ctx.path("cluster_count_vs_d.csv"),
                     ds, [r["clusters"] for r in rows])
    write_series_csv(ctx.path("velocity_deviation_vs_d.csv"),
                     ds, [r["velocity_deviation_probe"] for r in rows])
    ctx.summary["sweep"] = rows
    ctx.summary["probe_time"] = probe


@_register(
    "sec53_asymptotic_graphs",
    "asymptotic interaction-weight heatmaps of the fast-adaptation model",
    "same arc initial data as the radius sweep; for each radius in d_values "
    "emits the matrix of neighborhood-gated velocity cosines at the final "
    "time",
    horizon_t=100.0, sample_every=100,
    params={"n": 50, "d_values": (0.56, 0.58, 0.60, 0.65), "kappa_global": 0.7},
)
def _run_sec53_graphs(config, ctx, horizon, sample_every, params):
    state = arc_initial_data(int(params["n"]))
    ctx.summary["cases"] = []
    for d in params["d_values"]:
        model = ModelParams("singular_cs", radius_d=float(d),
                            kappa_global=float(params["kappa_global"]))
        traj = integrate(model, state, horizon, config.dt,
                         sample_every=sample_every)
        x = traj.positions[-1]
        v = traj.velocities[-1]
        psi, _ = neighborhood(x, float(d))
        weights = psi * similarity_matrix(v)
        write_matrix_csv(ctx.path(f"psi_a_d{d:g}.csv"), weights)
        count, _ = cluster_count(x, float(d))
        ctx.summary["cases"].append({"d": float(d), "clusters": int(count)})


# ---------------------------------------------------------------------------
# Two-body validation
# ---------------------------------------------------------------------------

def draw_two_body_instance(rng: np.random.Generator):
    """Random pair inside the unit radius with a generic velocity geometry."""
    x1 = rng.uniform(-0.4, 0.4, size=2)
    x2 = rng.uniform(-0.4, 0.4, size=2)
    angle = rng.uniform(-1.2, 1.2)
    s1, s2 = rng.uniform(0.2, 1.5, size=2)
    v1 = s1 * np.array([1.0, 0.0])
    v2 = s2 * np.array([math.cos(angle), math.sin(angle)])
    return x1, x2, v1, v2


def simulate_two_body_outcome(x1, x2, v1, v2, kappa, d, horizon, dt,
                              sample_every=100):
    """Oracle run; returns (label, traj) with label in
    flocking / dispersion / other."""
    traj = integrate(ModelParams("singular_cs", radius_d=d, kappa_global=kappa),
                     ParticleEnsemble(np.stack([x1, x2]), np.stack([v1, v2])),
                     horizon, dt, sample_every=sample_every)
    gap = float(np.linalg.norm(traj.velocities[-1, 0] - traj.velocities[-1, 1]))
    if traj.max_pairwise_distance < d and gap < 1e-4:
        return "flocking", traj
    dists = np.linalg.norm(traj.positions[:, 0] - traj.positions[:, 1], axis=1)
    crossed = np.nonzero(dists >= d)[0]
    if crossed.size:
        after = crossed[0] + 1
        if after < traj.n_samples:
            ref = traj.velocities[after]
            frozen = bool(np.max(np.abs(traj.velocities[after:] - ref)) <= 1e-12)
        else:
            frozen = True
        if frozen:
            return "dispersion", traj
    return "other", traj


@_register(
    "twobody_validation",
    "two-particle sufficient conditions checked against simulation",
    "draws seeded random pairs inside the interaction radius, classifies "
    "each with the analytic sufficient conditions, simulates every definite "
    "verdict to the horizon, and reports the agreement rate",
    horizon_t=200.0, sample_every=100,
    params={"radius_d": 1.0, "kappa_global": 1.0, "n_definite": 110,
            "max_draws": 600},
)
def _run_twobody(config, ctx, horizon, sample_every, params):
    d = float(params["radius_d"])
    kappa = float(params["kappa_global"])
    rows = []
    agreements = 0
    definite = 0
    for idx in range(int(params["max_draws"])):
        rng = scenario_rng(config.seed, stream=idx + 1)
        x1, x2, v1, v2 = draw_two_body_instance(rng)
        verdict = two_body_classify(x1, x2, v1, v2, kappa, d)
        if verdict.verdict == "indeterminate":
            continue
        definite += 1
        outcome, _ = simulate_two_body_outcome(x1, x2, v1, v2, kappa, d,
                                               horizon, config.dt,
                                               sample_every)
        agree = outcome == verdict.verdict
        agreements += int(agree)
        rows.append((idx, verdict.verdict, verdict.lhs_value, outcome, agree))
        if definite >= int(params["n_definite"]):
            break
    lines = ["instance,verdict,lhs,simulated,agree"]
    for idx, v, lhs, outcome, agree in rows:
        lines.append(f"{idx},{v},{lhs!r},{outcome},{int(agree)}")
    from .scenario import _write_atomic
    _write_atomic(ctx.path("instances.csv"), "\n".join(lines) + "\n")
    ctx.summary["definite"] = definite
    ctx.summary["agreements"] = agreements
    ctx.summary["agreement_rate"] = agreements / definite if definite else None


# ---------------------------------------------------------------------------
# Custom configs
# ---------------------------------------------------------------------------

def build_initial(spec: dict, seed: int):
    kind = spec.get("kind")
    if kind == "uniform_interval":
        rng = scenario_rng(seed)
        n, dim = int(spec["n"]), int(spec.get("dim", 1))
        x0 = rng.uniform(float(spec["low"]), float(spec["high"]), size=(n, dim))
        return ParticleEnsemble(x0, np.zeros_like(x0)), None
    if kind == "table":
        return table_initial_data(seed, int(spec.get("n", 60)))
    if kind == "circle_arc":
        return arc_initial_data(int(spec.get("n", 50)),
                                float(spec.get("speed", 1.0 / 3.0))), None
    if kind == "explicit":
        state = ParticleEnsemble(np.asarray(spec["positions"], dtype=float),
                                 np.asarray(spec["velocities"], dtype=float))
        coupling = None
        if "kappa" in spec:
            coupling = CouplingMatrix(np.asarray(spec["kappa"], dtype=float))
        return state, coupling
    raise ConfigInvalidError(f"unknown initial-data kind {kind!r}")


def _run_custom(config, ctx, horizon, sample_every, params):
    from .scenario import build_temporal_graph

    model_spec = params.get("model")
    if not isinstance(model_spec, dict) or "kind" not in model_spec:
        raise ConfigInvalidError("custom scenario needs params.model.kind")
    model = ModelParams(model_spec["kind"],
                        radius_d=float(model_spec.get("radius_d", 1.0)),
                        kappa_global=float(model_spec.get("kappa_global", 1.0)),
                        epsilon=float(model_spec.get("epsilon", 0.0)))
    state, coupling = build_initial(params.get("initial", {}), config.seed)
    tg = None
    if model.model == "laplacian":
        if "graph" not in params:
            raise ConfigInvalidError("laplacian scenario needs params.graph")
        tg = build_temporal_graph(params["graph"], config.dt, config.seed)
    traj = integrate(model, state, horizon, config.dt,
                     sample_every=sample_every, coupling=coupling,
                     temporal_graph=tg)
    outputs = params.get("outputs", ["diameter"])
    for name in outputs:
        if name == "diameter":
            series = _diameter_series(traj)
        elif name == "fluctuation_norm":
            series = _fluctuation_series(traj)
        elif name == "velocity_deviation":
            if traj.velocities is None:
                raise ConfigInvalidError("velocity_deviation needs velocities")
            series = _velocity_deviation_series(traj)
        elif name == "trajectory":
            write_trajectory_csv(ctx.path("trajectory.csv"), traj)
            continue
        else:
            raise ConfigInvalidError(f"unknown output {name!r}")
        ctx.add_metric(name, traj.times, series,
                       log_slope=_tail_slope(traj.times, series))
