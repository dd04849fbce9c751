"""Declarative scenario configs, the run orchestrator, and file emission.

A scenario names a preset (or a custom single-model config), a seed, and
output knobs; running one produces a directory of metric CSVs, a
``summary.json``, and a ``manifest.json`` with content digests. Identical
(config, seed, toolkit version) triples produce byte-identical outputs: all
randomness flows through counter-based generators keyed by the seed, and
floats are serialized with ``repr``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__, generators
from .analysis import cluster_count, cluster_sizes
from .dynamics import TrajectoryRecord
from .errors import ConfigInvalidError, IoFailureError, Requires2DError
from .graphs import TemporalGraph, WeightedDigraph, graph_to_json


@dataclass
class ScenarioConfig:
    """One experiment: preset name (or "custom"), seed, and overrides.

    ``params`` holds preset-specific knobs (radii, coupling strengths,
    snapshot times); presets document their own keys. For custom scenarios
    ``params`` carries the full model/graph/initial description.
    """

    name: str
    seed: int = 0
    horizon_t: Optional[float] = None
    dt: float = 1e-3
    sample_every: Optional[int] = None
    out_dir: Optional[str] = None
    params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.name:
            raise ConfigInvalidError("scenario needs a name")
        if self.dt <= 0.0:
            raise ConfigInvalidError("dt must be positive")
        if self.horizon_t is not None and self.horizon_t <= 0.0:
            raise ConfigInvalidError("horizon_t must be positive")
        if self.sample_every is not None and self.sample_every < 1:
            raise ConfigInvalidError("sample_every must be a positive integer")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigInvalidError("seed must be a nonnegative integer")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigInvalidError(f"config is not valid JSON: {err}") from err
        if not isinstance(obj, dict):
            raise ConfigInvalidError("config must be a JSON object")
        known = {"name", "seed", "horizon_t", "dt", "sample_every", "out_dir", "params"}
        unknown = set(obj) - known
        if unknown:
            raise ConfigInvalidError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**obj)
        cfg.validate()
        return cfg


@dataclass
class RunManifest:
    """What a run produced: config snapshot, version, timing, digests."""

    config: dict
    version: str
    seed: int
    duration_s: float
    outputs: list

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def scenario_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; distinct streams never collide."""
    return np.random.Generator(np.random.Philox(key=seed + (stream << 64)))


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def write_series_csv(path: Path, times, values) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "value"])
    for t, v in zip(times, values):
        w.writerow([_fmt(t), _fmt(v)])
    _write_atomic(path, buf.getvalue())


def write_matrix_csv(path: Path, matrix) -> None:
    m = np.asarray(matrix, dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in m:
        w.writerow([_fmt(v) for v in row])
    _write_atomic(path, buf.getvalue())


def write_trajectory_csv(path: Path, traj: TrajectoryRecord,
                         include_kappa: bool = False) -> None:
    """Flattened samples: t, x_i_k, v_i_k, and optionally kappa_i_j."""
    n, dim = traj.positions.shape[1:]
    header = ["t"]
    header += [f"x_{i}_{k}" for i in range(n) for k in range(dim)]
    if traj.velocities is not None:
        header += [f"v_{i}_{k}" for i in range(n) for k in range(dim)]
    if include_kappa:
        if traj.kappas is None:
            raise ConfigInvalidError("trajectory has no sampled couplings")
        header += [f"kappa_{i}_{j}" for i in range(n) for j in range(n)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for s in range(traj.n_samples):
        row = [_fmt(traj.times[s])]
        row += [_fmt(v) for v in traj.positions[s].ravel()]
        if traj.velocities is not None:
            row += [_fmt(v) for v in traj.velocities[s].ravel()]
        if include_kappa:
            row += [_fmt(v) for v in traj.kappas[s].ravel()]
        w.writerow(row)
    _write_atomic(path, buf.getvalue())


def write_graph_json(path: Path, g: WeightedDigraph) -> None:
    _write_atomic(path, graph_to_json(g))


def _write_atomic(path: Path, text: str) -> None:
    try:
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as err:
        raise IoFailureError(f"cannot write {path}: {err}") from err


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Cluster reporting
# ---------------------------------------------------------------------------

def cluster_report(traj: TrajectoryRecord, at_time: float, radius_d: float) -> list:
    """Clusters at the requested sample, largest first.

    Each entry is (size, mean polar angle in degrees within [0, 360)), the
    angle being that of the cluster's mean velocity. Velocities must be
    two-dimensional.
    """
    if traj.velocities is None or traj.velocities.shape[2] != 2:
        raise Requires2DError("cluster report needs 2-dimensional velocities")
    s = traj.sample_index_at(at_time)
    _, labels = cluster_count(traj.positions[s], radius_d)
    sizes = cluster_sizes(labels)
    report = []
    for label in range(len(sizes)):
        members = labels == label
        mean_v = traj.velocities[s][members].mean(axis=0)
        angle = float(np.degrees(np.arctan2(mean_v[1], mean_v[0])) % 360.0)
        report.append((int(sizes[label]), angle))
    report.sort(key=lambda item: (-item[0], item[1]))
    return report


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

class RunContext:
    """Collects output files and summary fragments for one run."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: list = []
        self.summary: dict = {"metrics": []}

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out_dir / name

    def add_metric(self, name: str, times, values, log_slope=None,
                   envelope_rate=None, envelope_satisfied=None,
                   write: bool = True) -> None:
        values = np.asarray(values, dtype=float)
        if write:
            write_series_csv(self.path(f"{name}.csv"), times, values)
        self.summary["metrics"].append({
            "name": name,
            "final_value": float(values[-1]),
            "log_slope": log_slope,
            "envelope_rate": envelope_rate,
            "envelope_satisfied": envelope_satisfied,
        })


def run_scenario(config: ScenarioConfig) -> RunManifest:
    """Build, integrate, measure, and emit one scenario.

    The preset's runner does the model-specific work through a RunContext;
    this wrapper owns directory setup, the summary, and the manifest (written
    atomically last, so a manifest's presence marks a completed run).
    """
    from . import presets  # local import: presets build on this module

    config.validate()
    runner = presets.lookup(config.name)
    out_dir = Path(config.out_dir or f"runs/{config.name}")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise IoFailureError(f"cannot create {out_dir}: {err}") from err

    started = time.perf_counter()
    ctx = RunContext(out_dir)
    runner.run(config, ctx)
    duration = time.perf_counter() - started

    ctx.summary["scenario"] = config.name
    ctx.summary["seed"] = config.seed
    ctx.summary["version"] = __version__
    _write_atomic(out_dir / "summary.json",
                  json.dumps(ctx.summary, sort_keys=True, indent=2))
    ctx.files.append("summary.json")

    manifest = RunManifest(
        config=json.loads(config.to_json()),
        version=__version__,
        seed=config.seed,
        duration_s=duration,
        outputs=[{"path": name, "sha256": _sha256(out_dir / name)}
                 for name in sorted(set(ctx.files))],
    )
    _write_atomic(out_dir / "manifest.json", manifest.to_json())
    return manifest


# ---------------------------------------------------------------------------
# Graph builders addressable from configs
# ---------------------------------------------------------------------------

def build_graph(spec: dict) -> WeightedDigraph:
    """Instantiate a static generator from {"generator": name, ...params}."""
    kind = spec.get("generator")
    weight = float(spec.get("weight", 1.0))
    n = int(spec.get("n", 0))
    if kind == "one_leader":
        return generators.one_leader(n, weight)
    if kind == "two_leaders":
        return generators.two_leaders(n, weight)
    if kind == "three_group":
        return generators.three_group_directed(tuple(spec["sizes"]), weight)
    if kind == "circulant":
        return generators.circulant_regular(n, int(spec["degree"]), weight)
    if kind == "overlapping_cliques":
        return generators.overlapping_cliques(n, int(spec["n_min"]),
                                              int(spec["n_max"]), weight)
    if kind == "complete":
        w = np.full((n, n), weight)
        np.fill_diagonal(w, 0.0)
        return WeightedDigraph(w)
    raise ConfigInvalidError(f"unknown graph generator {kind!r}")


def build_temporal_graph(spec: dict, dt: float, seed: int) -> TemporalGraph:
    """Instantiate a temporal graph; static specs become one-piece schedules."""
    from .graphs import PeriodicTemporal, constant_temporal

    mode = spec.get("temporal")
    if not mode:
        return constant_temporal(build_graph(spec))
    period = float(spec.get("period", 10.0 * dt))
    n = int(spec.get("n", 0))
    weight = float(spec.get("weight", 1.0))
    if mode in ("SwitchingOne", "SwitchingTwo", "MixedOneTwo"):
        sched = generators.LeaderSchedule(mode, period=period, seed=seed)
        return generators.leader_temporal(n, weight, sched, horizon=period)
    if mode == "three_group":
        return generators.three_group_temporal(n, weight, period, seed)
    if mode == "reperturbed":
        base = build_graph(spec["base"])
        gamma_m = float(spec["gamma_m"])
        epsilon = float(spec["epsilon"])

        def build(piece: int) -> WeightedDigraph:
            return generators.perturb_weights(base, gamma_m, epsilon,
                                              seed=seed + 7919 * (piece + 1))

        return PeriodicTemporal(period, build)
    raise ConfigInvalidError(f"unknown temporal mode {mode!r}")
