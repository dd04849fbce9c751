"""Figure builders over flocklab run directories.

Every figure id maps to a fixed recipe over the files a preset emits:
log-scale line plots for decay series with the guaranteed envelope drawn as a
thick gray line, scatter-on-circle panels for velocity polar angles, and
matrix heatmaps for coupling / gated-similarity data. Inputs are read
strictly from CSV/JSON; a missing or empty input is an explicit error, never
a blank image.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotkit"  # deterministic SVG ids

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


class MissingInputError(Exception):
    """A required input file is absent or holds no rows."""


class ParseError(Exception):
    """An input file exists but cannot be parsed."""


@dataclass
class FigureSpec:
    """One figure request: id, producing run directory, output image path."""

    figure_id: str
    run_dir: Path
    out_path: Path


def _read_series(path: Path):
    if not path.exists():
        raise MissingInputError(f"required series {path} does not exist")
    try:
        with path.open() as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise MissingInputError(f"{path} is empty")
            rows = [(float(a), float(b)) for a, b in reader]
    except (ValueError, csv.Error) as err:
        raise ParseError(f"cannot parse {path}: {err}") from err
    if not rows:
        raise MissingInputError(f"{path} holds no samples")
    t, v = zip(*rows)
    return np.asarray(t), np.asarray(v)


def _read_summary(run_dir: Path) -> dict:
    path = run_dir / "summary.json"
    if not path.exists():
        raise MissingInputError(f"{path} does not exist")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ParseError(f"cannot parse {path}: {err}") from err


def _read_matrix(path: Path) -> np.ndarray:
    if not path.exists():
        raise MissingInputError(f"required matrix {path} does not exist")
    try:
        m = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as err:
        raise ParseError(f"cannot parse {path}: {err}") from err
    if m.size == 0:
        raise MissingInputError(f"{path} holds no data")
    return m


def _save(fig, out_path: Path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    # Strip the volatile date so identical inputs give identical bytes.
    metadata = {"Date": None} if out_path.suffix == ".svg" else None
    fig.savefig(out_path, metadata=metadata)
    plt.close(fig)
    return out_path


def _decay_plot(run_dir: Path, series_names, envelope_names, title, ylabel):
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    for name in envelope_names:
        t, v = _read_series(run_dir / name)
        ax.semilogy(t, np.maximum(v, 1e-300), color="0.6", linewidth=4.0,
                    alpha=0.7, zorder=1)
    for name, style in series_names:
        t, v = _read_series(run_dir / name)
        keep = v > 0
        label = name.replace(".csv", "")
        ax.semilogy(t[keep], v[keep], style, label=label, zorder=2)
    ax.set_xlabel("time t")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def _render_fig3a(run_dir: Path, out_path: Path) -> Path:
    series = [
        ("diameter_fixed_one.csv", "b-"),
        ("diameter_fixed_two.csv", "b--"),
        ("diameter_switching_one.csv", "-"),
        ("diameter_switching_two.csv", "--"),
        ("diameter_mixed.csv", ":"),
    ]
    fig = _decay_plot(run_dir, series, ["envelope.csv"],
                      "leader graphs", "diameter D(t)")
    return _save(fig, out_path)


def _render_fig3b(run_dir: Path, out_path: Path) -> Path:
    series = [("diameter_fixed.csv", "-"), ("diameter_temporal.csv", "--")]
    fig = _decay_plot(run_dir, series, ["envelope.csv"],
                      "three-group digraphs", "diameter D(t)")
    return _save(fig, out_path)


def _render_fig3c(run_dir: Path, out_path: Path) -> Path:
    tags = ["30_30", "30_45", "30_58", "38_38"]
    series = [(f"fluctuation_{tag}.csv", style)
              for tag, style in zip(tags, ["-", "--", ":", "-."])]
    envelopes = [f"envelope_{tag}.csv" for tag in tags]
    fig = _decay_plot(run_dir, series, envelopes,
                      "bounded-asymmetry graphs", "fluctuation norm")
    return _save(fig, out_path)


def _render_sec53a(run_dir: Path, out_path: Path) -> Path:
    d, counts = _read_series(run_dir / "cluster_count_vs_d.csv")
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=120)
    ax.plot(d, counts, "o-")
    ax.set_xlabel("radius d")
    ax.set_ylabel("number of clusters")
    ax.set_title("clusters at the final time")
    fig.tight_layout()
    return _save(fig, out_path)


def _render_sec53b(run_dir: Path, out_path: Path) -> Path:
    d, dev = _read_series(run_dir / "velocity_deviation_vs_d.csv")
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=120)
    ax.semilogy(d, np.maximum(dev, 1e-300), "s-")
    ax.set_xlabel("radius d")
    ax.set_ylabel("mean velocity deviation")
    ax.set_title("velocity deviation at the probe time")
    fig.tight_layout()
    return _save(fig, out_path)


def _panel_grid(count):
    cols = min(count, 4)
    rows = (count + cols - 1) // cols
    return rows, cols


def _render_heatmaps(run_dir: Path, out_path: Path) -> Path:
    # The run's summary names exactly one matrix per swept radius.
    summary = _read_summary(run_dir)
    try:
        radii = [case["d"] for case in summary["cases"]]
    except (KeyError, TypeError) as err:
        raise ParseError(f"summary of {run_dir} lacks heatmap cases: {err}") from err
    paths = [run_dir / f"psi_a_d{d:g}.csv" for d in radii]
    rows, cols = _panel_grid(len(paths))
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 3.0 * rows),
                             dpi=120, squeeze=False)
    for ax in axes.ravel():
        ax.set_visible(False)
    image = None
    for ax, path in zip(axes.ravel(), paths):
        ax.set_visible(True)
        m = _read_matrix(path)
        image = ax.imshow(m, vmin=-1.0, vmax=1.0, cmap="viridis")
        ax.set_title(path.stem.replace("psi_a_", ""), fontsize=9)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.colorbar(image, ax=axes.ravel().tolist(), shrink=0.8)
    return _save(fig, out_path)


def _render_snapshots(run_dir: Path, out_path: Path) -> Path:
    summary = _read_summary(run_dir)
    try:
        stamps = list(summary["stamps"])
        matrix_prefix = "kappa" if summary["model"] == "adaptive" else "logdist"
    except (KeyError, TypeError) as err:
        raise ParseError(f"summary of {run_dir} lacks snapshot stamps: {err}") from err
    angle_paths = [run_dir / f"angles_t{t:g}.csv" for t in stamps]
    matrix_paths = [run_dir / f"{matrix_prefix}_t{t:g}.csv" for t in stamps]
    panels = len(angle_paths) + len(matrix_paths)
    rows, cols = _panel_grid(panels)
    fig, axes = plt.subplots(rows, cols, figsize=(2.8 * cols, 2.8 * rows),
                             dpi=120, squeeze=False)
    flat = axes.ravel()
    for ax in flat:
        ax.set_visible(False)
    for ax, path in zip(flat, angle_paths):
        ax.set_visible(True)
        _, angles = _read_series(path)
        rad = np.radians(angles)
        circle = np.linspace(0.0, 2.0 * math.pi, 256)
        ax.plot(np.cos(circle), np.sin(circle), color="0.8", linewidth=1.0)
        ax.scatter(np.cos(rad), np.sin(rad), s=12)
        ax.set_aspect("equal")
        ax.set_xlim(-1.25, 1.25)
        ax.set_ylim(-1.25, 1.25)
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title(f"t={path.stem[len('angles_t'):]}", fontsize=9)
    for ax, path in zip(flat[len(angle_paths):], matrix_paths):
        ax.set_visible(True)
        m = _read_matrix(path)
        if path.stem.startswith("kappa"):
            ax.imshow(m, vmin=-1.0, vmax=1.0, cmap="viridis")
        else:
            ax.imshow(m, cmap="coolwarm")
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title(path.stem, fontsize=9)
    fig.tight_layout()
    return _save(fig, out_path)


_RENDERERS = {
    "fig3a": _render_fig3a,
    "fig3b": _render_fig3b,
    "fig3c": _render_fig3c,
    "sec53a": _render_sec53a,
    "sec53b": _render_sec53b,
    "heatmaps": _render_heatmaps,
    "snapshots": _render_snapshots,
}

FIGURE_IDS = tuple(sorted(_RENDERERS))


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written image path."""
    if spec.figure_id not in _RENDERERS:
        raise ValueError(f"unknown figure id {spec.figure_id!r}; "
                         f"known: {', '.join(FIGURE_IDS)}")
    run_dir = Path(spec.run_dir)
    if not run_dir.is_dir():
        raise MissingInputError(f"run directory {run_dir} does not exist")
    return _RENDERERS[spec.figure_id](run_dir, Path(spec.out_path))
