"""Trajectory metrics, theoretical decay envelopes, and analytic certificates.

Besides the plain observables (diameter, fluctuation norm, velocity
deviation, cluster counts) this module houses the pairwise-error matrix with
its row-dominance margin, the edgewise dissipation identity used to
cross-check the Lyapunov decay on bounded-asymmetry graphs, and the two-body
initial-data classifier with its sufficient flocking/dispersion conditions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import TrajectoryRecord, similarity
from .errors import (
    EdgeAsymmetryError,
    PreconditionViolatedError,
    UnknownKindError,
)
from .graphs import WeightedDigraph

LOG_SLOPE_FLOOR = 1e-12


@dataclass
class MetricSeries:
    """Named time series of one scalar metric."""

    name: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise PreconditionViolatedError("times and values must have equal length")
        if np.any(np.diff(t) <= 0.0):
            raise PreconditionViolatedError("times must increase strictly")
        self.times, self.values = t, v


def diameter(points) -> float:
    """Largest pairwise Euclidean distance; 0 for a single point."""
    x = np.atleast_2d(np.asarray(getattr(points, "positions", points), dtype=float))
    if x.shape[0] < 2:
        return 0.0
    diff = x[:, None, :] - x[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max()))


def fluctuation_norm(arr: np.ndarray) -> float:
    """Euclidean (Frobenius) norm of the mean-centered state."""
    a = np.asarray(arr, dtype=float)
    return float(np.linalg.norm(a - a.mean(axis=0)))


def velocity_deviation(velocities: np.ndarray) -> float:
    """Mean distance of the velocities to their ensemble mean."""
    v = np.atleast_2d(np.asarray(velocities, dtype=float))
    return float(np.linalg.norm(v - v.mean(axis=0), axis=1).mean())


# ---------------------------------------------------------------------------
# Decay envelopes
# ---------------------------------------------------------------------------

ENVELOPE_KINDS = ("CompleteSym", "NeighborConn", "AssumptionB")


def envelope_rate(kind: str, params: dict) -> float:
    """Guaranteed decay exponent for the given connectivity class.

    CompleteSym: alpha_m * N on the fluctuation norm. NeighborConn: w_m on
    pairwise distances. AssumptionB: gamma_m * delta / N on the fluctuation
    norm (the stated rate; see assumption_b_conservative_rate for the rate
    the proof's final differential inequality actually yields).
    """
    if kind == "CompleteSym":
        return float(params["alpha_m"]) * float(params["n_vertices"])
    if kind == "NeighborConn":
        return float(params["w_m"])
    if kind == "AssumptionB":
        return float(params["gamma_m"]) * float(params["delta"]) / float(params["n_vertices"])
    raise UnknownKindError(f"kind must be one of {ENVELOPE_KINDS}, got {kind!r}")


def assumption_b_conservative_rate(gamma_m: float, delta: float, ratio: float,
                                   n_vertices: int) -> float:
    """Conservative exponent gamma_m * delta / (ratio * N) on the fluctuation
    norm; weaker than the stated rate by the factor ratio."""
    return gamma_m * delta / (ratio * n_vertices)


def decay_envelope(kind: str, params: dict, t: float, initial_value: float) -> float:
    """Theoretical upper bound initial_value * exp(-rate * t).

    Rate parameters must be positive; negative t is rejected.
    """
    rate = envelope_rate(kind, params)
    if rate <= 0.0:
        raise PreconditionViolatedError("envelope rate must be positive")
    if t < 0.0:
        raise PreconditionViolatedError("time must be nonnegative")
    return initial_value * math.exp(-rate * t)


# ---------------------------------------------------------------------------
# Pairwise-error matrix and row dominance
# ---------------------------------------------------------------------------

def pair_index(i: int, j: int, n: int) -> int:
    """Lexicographic index of the unordered pair (i, j), i < j."""
    if not 0 <= i < j < n:
        raise PreconditionViolatedError("need 0 <= i < j < n")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def e_matrix(g: WeightedDigraph) -> np.ndarray:
    """Coefficient matrix of the differential inequality for squared pairwise
    distances.

    Rows and columns are indexed by unordered pairs (i, j), i < j, in
    lexicographic order. The diagonal entry of row (i, j) is
    -2(a_ij + a_ji) - sum_{l != i,j} (a_il + a_jl); the off-diagonal entry in
    column (i, m) is the positive part of (a_jm - a_im) and in column (j, m)
    the positive part of (a_im - a_jm); everything else is zero.
    """
    n = g.n_vertices
    if n < 2:
        raise PreconditionViolatedError("need at least two vertices")
    a = g.weights
    m = n * (n - 1) // 2
    e = np.zeros((m, m))
    row_out = a.sum(axis=1)  # sum_j a_ij including the pair partner
    for i in range(n - 1):
        for j in range(i + 1, n):
            r = pair_index(i, j, n)
            e[r, r] = -(a[i, j] + a[j, i]) - (row_out[i] + row_out[j])
            for l in range(n):
                if l == i or l == j:
                    continue
                gap = a[j, l] - a[i, l]
                col_i = pair_index(min(i, l), max(i, l), n)
                col_j = pair_index(min(j, l), max(j, l), n)
                e[r, col_i] = gap if gap > 0.0 else 0.0
                e[r, col_j] = -gap if gap < 0.0 else 0.0
    return e


def row_dominance_margin(e: np.ndarray) -> float:
    """Minimum over rows of |diagonal| - sum of off-diagonal absolute values.

    On any graph whose every vertex pair is directly linked or shares a
    bidirectional hub, with present weights >= w_m, this margin is >= 2 w_m.
    """
    e = np.asarray(e, dtype=float)
    diag = np.abs(np.diag(e))
    off = np.abs(e).sum(axis=1) - np.abs(np.diag(e))
    return float((diag - off).min())


def assumption_b_dissipation(state: np.ndarray, g: WeightedDigraph) -> float:
    """Edgewise value of d/dt (1/2)||mean-centered state||^2.

    Computes -(1/2) * sum over ordered present edges of
    (w_ij + w_ji)/2 * (xh_i - xh_j)^2 + (w_ij - w_ji)/2 * (xh_i^2 - xh_j^2)
    over the mean-centered state xh; equal to -xh^T L xh, giving a second
    route to the Lyapunov derivative. Requires a symmetric edge set.
    """
    mask = g.edge_mask()
    if np.any(mask != mask.T):
        raise EdgeAsymmetryError("edge set must be symmetric")
    x = np.asarray(state, dtype=float)
    if x.shape != (g.n_vertices,):
        raise PreconditionViolatedError("state must be a vector over the vertices")
    xh = x - x.mean()
    w = g.weights
    total = 0.0
    for i in range(g.n_vertices):
        for j in range(g.n_vertices):
            if not mask[i, j]:
                continue
            sym = 0.5 * (w[i, j] + w[j, i])
            anti = 0.5 * (w[i, j] - w[j, i])
            total += sym * (xh[i] - xh[j]) ** 2 + anti * (xh[i] ** 2 - xh[j] ** 2)
    return -0.5 * total


# ---------------------------------------------------------------------------
# Clusters
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def cluster_count(positions: np.ndarray, radius_d: float) -> tuple:
    """Connected components of the proximity graph ||x_i - x_j|| < radius_d.

    Returns (count, labels); labels are component ids ordered by each
    component's smallest member index, so they are stable under relabeling.
    """
    if radius_d <= 0.0:
        raise PreconditionViolatedError("radius_d must be positive")
    x = np.atleast_2d(np.asarray(positions, dtype=float))
    n = x.shape[0]
    uf = _UnionFind(n)
    d2 = radius_d * radius_d
    for i in range(n - 1):
        delta = x[i + 1:] - x[i]
        close = np.nonzero(np.einsum("jk,jk->j", delta, delta) < d2)[0]
        for off in close:
            uf.union(i, i + 1 + int(off))
    roots = [uf.find(i) for i in range(n)]
    order = {}
    labels = np.empty(n, dtype=np.int64)
    for i, r in enumerate(roots):
        if r not in order:
            order[r] = len(order)
        labels[i] = order[r]
    return len(order), labels


def cluster_sizes(labels: np.ndarray) -> np.ndarray:
    """Component sizes indexed by label."""
    return np.bincount(np.asarray(labels, dtype=np.int64))


# ---------------------------------------------------------------------------
# Two-body classifier
# ---------------------------------------------------------------------------

@dataclass
class TwoBodyVerdict:
    """Outcome of the two-particle sufficient-condition test.

    ``lhs_value`` is the left side of whichever condition fired (for the
    indeterminate gap, the flocking-side value); ``threshold`` is d^2.
    """

    verdict: str  # "flocking" | "dispersion" | "indeterminate"
    lhs_value: float
    threshold: float
    reason: Optional[str] = None


def two_body_classify(x1, x2, v1, v2, kappa_global: float,
                      radius_d: float) -> TwoBodyVerdict:
    """Classify two-particle initial data as flocking, dispersion, or neither.

    Standing hypotheses: the particles start within the interaction radius
    and their velocity cosine a_m is positive; otherwise the verdict is
    indeterminate with a reason. With u0 = (x1-x2).(v1-v2), the squared
    distance satisfies ||dx(t)||^2 = ||dx0||^2 + 2 * int u, and bounding the
    similarity between a_m and 1 in the explicit solution of u gives

    dispersion if u0 >= 0 and ||dx||^2 + 2 u0/kappa + ||dv||^2/kappa^2 > d^2,
    or u0 < 0 with 2 u0/(kappa a_m) in place of 2 u0/kappa;
    flocking if u0 >= 0 and ||dx||^2 + 2 u0/(kappa a_m)
    + ||dv||^2/(a_m kappa)^2 < d^2, or u0 < 0 with 2 u0/kappa instead.

    The conditions are sufficient, not a dichotomy, so the gap between them
    is reported honestly as indeterminate.
    """
    if kappa_global <= 0.0 or radius_d <= 0.0:
        raise PreconditionViolatedError("kappa_global and radius_d must be positive")
    x1, x2 = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
    v1, v2 = np.asarray(v1, dtype=float), np.asarray(v2, dtype=float)
    dx = x1 - x2
    dv = v1 - v2
    d2 = radius_d * radius_d
    dist2 = float(dx @ dx)
    if dist2 >= d2:
        return TwoBodyVerdict("indeterminate", dist2, d2,
                              reason="particles start outside the interaction radius")
    a_m = similarity(v1, v2)
    if a_m <= 0.0:
        return TwoBodyVerdict("indeterminate", dist2, d2,
                              reason="initial velocity cosine is not positive")
    u0 = float(dx @ dv)
    dv2 = float(dv @ dv)
    k = kappa_global
    if u0 >= 0.0:
        lhs_disp = dist2 + 2.0 * u0 / k + dv2 / (k * k)
        lhs_flock = dist2 + 2.0 * u0 / (k * a_m) + dv2 / (a_m * k) ** 2
    else:
        lhs_disp = dist2 + 2.0 * u0 / (k * a_m) + dv2 / (k * k)
        lhs_flock = dist2 + 2.0 * u0 / k + dv2 / (a_m * k) ** 2
    if lhs_disp > d2:
        return TwoBodyVerdict("dispersion", lhs_disp, d2)
    if lhs_flock < d2:
        return TwoBodyVerdict("flocking", lhs_flock, d2)
    return TwoBodyVerdict("indeterminate", lhs_flock, d2,
                          reason="neither sufficient condition fired")


# ---------------------------------------------------------------------------
# Trajectory-level detectors
# ---------------------------------------------------------------------------

def flocking_detector(traj: TrajectoryRecord, dist_bound: float,
                      vel_tol: float) -> bool:
    """Bounded group plus vanishing velocity spread.

    True exactly when the diameter stays <= dist_bound over every sample and
    the final sample's largest pairwise velocity difference is <= vel_tol.
    """
    if traj.n_samples == 0:
        raise PreconditionViolatedError("trajectory must be nonempty")
    sup_diam = max(diameter(traj.positions[s]) for s in range(traj.n_samples))
    if sup_diam > dist_bound:
        return False
    v = traj.velocities
    if v is None:
        return True
    vf = v[-1]
    dv = vf[:, None, :] - vf[None, :, :]
    max_dv = float(np.sqrt(np.einsum("ijk,ijk->ij", dv, dv).max()))
    return max_dv <= vel_tol


def min_similarity_series(traj: TrajectoryRecord) -> MetricSeries:
    """Per-sample minimum pairwise velocity cosine over all pairs."""
    if traj.velocities is None:
        raise PreconditionViolatedError("trajectory carries no velocities")
    values = np.empty(traj.n_samples)
    for s in range(traj.n_samples):
        v = traj.velocities[s]
        norms = np.linalg.norm(v, axis=1)
        a = np.clip((v @ v.T) / np.outer(norms, norms), -1.0, 1.0)
        values[s] = a.min()
    return MetricSeries("min_similarity", traj.times.copy(), values)


def log_slope(times: np.ndarray, values: np.ndarray,
              tail_fraction: float = 0.5, floor: float = LOG_SLOPE_FLOOR) -> float:
    """Least-squares slope of log(values) over the tail of the series.

    Only the final ``tail_fraction`` of the samples still above ``floor``
    enter the fit, which keeps floating-point floor contamination out of
    measured decay rates.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = v > floor
    t, v = t[keep], v[keep]
    if len(t) < 2:
        raise PreconditionViolatedError("not enough samples above the floor")
    start = int(len(t) * (1.0 - tail_fraction))
    t, v = t[start:], v[start:]
    if len(t) < 2:
        raise PreconditionViolatedError("tail too short for a slope fit")
    coeffs = np.polyfit(t, np.log(v), 1)
    return float(coeffs[0])
