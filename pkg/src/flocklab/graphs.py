"""Dense weighted digraphs, Laplacians, spectra, and connectivity certificates.

Graphs are stored as dense N x N weight matrices: ``weights[i, j]`` is the
weight of the directed edge i -> j, zero meaning absent. Vertex counts in the
target experiments stay in the low hundreds and the graphs of interest are
complete or near-complete, so dense storage wins over sparse.
"""
from __future__ import annotations

import csv
import io
import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidSizeError,
    NonSymmetricError,
    PreconditionViolatedError,
)

SYMMETRY_TOL = 1e-10
ZERO_EIG_REL_TOL = 1e-8


@dataclass
class WeightedDigraph:
    """Dense weighted directed graph with a zero diagonal.

    An edge is present exactly when its stored weight is nonzero; weights are
    assigned when the graph is built, never inferred.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatchError(f"weight matrix must be square, got {w.shape}")
        if w.shape[0] < 1:
            raise InvalidSizeError("graph needs at least one vertex")
        if np.any(np.diag(w) != 0.0):
            raise PreconditionViolatedError("diagonal weights must be zero")
        self.weights = w

    @property
    def n_vertices(self) -> int:
        return self.weights.shape[0]

    def edge_mask(self) -> np.ndarray:
        """Boolean adjacency: True where a directed edge is present."""
        return self.weights != 0.0

    def out_degrees(self) -> np.ndarray:
        """Weighted out-degree of every vertex (row sums)."""
        return self.weights.sum(axis=1)

    def neighbor_counts(self) -> np.ndarray:
        """Number of vertices j != i with a directed edge i -> j."""
        return self.edge_mask().sum(axis=1)

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        return bool(np.max(np.abs(self.weights - self.weights.T), initial=0.0) <= tol)

    def min_present_weight(self) -> float:
        """Smallest |weight| over present edges; inf for an empty graph."""
        present = np.abs(self.weights[self.edge_mask()])
        return float(present.min()) if present.size else math.inf


@dataclass
class LaplacianMatrix:
    """L = D - A with out-degree D; every row sums to zero."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        row_sums = np.abs(e.sum(axis=1))
        if np.any(row_sums > 1e-12):
            raise PreconditionViolatedError(
                f"Laplacian row sums must vanish, worst {row_sums.max():.3e}"
            )
        self.entries = e

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass
class ConnectivityCertificate:
    """Outcome of a structural check on a graph.

    ``witness`` names the first offending object (vertex pair, edge, or
    parameter) whenever ``holds`` is False. ``derived_rate`` carries the decay
    exponent the certificate guarantees, when one is available.
    """

    kind: str
    holds: bool
    witness: Optional[tuple] = None
    derived_rate: Optional[float] = None
    neighbor_range: Optional[tuple] = None


def laplacian(g: WeightedDigraph) -> LaplacianMatrix:
    """Graph Laplacian D - A with D the diagonal of row sums."""
    a = g.weights
    return LaplacianMatrix(np.diag(a.sum(axis=1)) - a)


def _jacobi_eigenvalues(a: np.ndarray, off_tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate away every off-diagonal element in turn until the
    off-diagonal Frobenius norm falls below ``off_tol`` (relative to the
    matrix norm) or ``max_sweeps`` is hit. Accurate and dependency-free for
    the small dense matrices used here.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    scale = max(float(np.linalg.norm(a)), 1.0)
    for _ in range(max_sweeps):
        off = math.sqrt(max(np.sum(a * a) - np.sum(a.diagonal() ** 2), 0.0))
        if off <= off_tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # Classic 2x2 symmetric Schur rotation
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:  # tau*tau would overflow; use the limit
                    t = 0.5 / tau
                elif tau != 0.0:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                else:
                    t = 1.0
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = a[q, p] = 0.0
    return np.sort(a.diagonal())


def symmetric_spectrum(l: LaplacianMatrix) -> np.ndarray:
    """Full real spectrum of a symmetric Laplacian, ascending.

    The multiplicity of (near-)zero eigenvalues equals the number of
    undirected connected components. Raises NonSymmetricError when the input
    is asymmetric beyond tolerance; the spectral arguments this feeds are
    symmetric-only.
    """
    e = l.entries
    asym = float(np.max(np.abs(e - e.T), initial=0.0))
    if asym > SYMMETRY_TOL:
        raise NonSymmetricError(f"Laplacian asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
    sym = 0.5 * (e + e.T)
    return _jacobi_eigenvalues(sym)


def zero_eigenvalue_multiplicity(spectrum: Sequence[float]) -> int:
    """Count eigenvalues within 1e-8 of zero, relative to the largest one."""
    spec = np.asarray(spectrum, dtype=float)
    scale = max(float(np.max(np.abs(spec), initial=0.0)), 1.0)
    return int(np.sum(np.abs(spec) <= ZERO_EIG_REL_TOL * scale))


def fiedler_value(g: WeightedDigraph) -> float:
    """Second-smallest Laplacian eigenvalue of a symmetric graph."""
    if not g.is_symmetric():
        raise NonSymmetricError("Fiedler value requires a symmetric graph")
    spec = symmetric_spectrum(laplacian(g))
    if len(spec) < 2:
        return 0.0
    return float(spec[1])


def quadratic_form(l: LaplacianMatrix, x: np.ndarray) -> float:
    """x^T L x.

    For a symmetric underlying graph this equals (1/2) * sum_ij a_ij
    (x_i - x_j)^2; for asymmetric Laplacians it is still well defined and is
    used as-is by the dissipation checks.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (l.n,):
        raise DimensionMismatchError(f"vector of length {l.n} required, got {x.shape}")
    return float(x @ (l.entries @ x))


@dataclass
class SpectrumComparison:
    """Result of the eigenvalue ordering check between two nested graphs."""

    ok: bool
    spectrum_p: np.ndarray
    spectrum_q: np.ndarray
    failed_index: Optional[int] = None


def eigenvalue_comparison_check(p: WeightedDigraph, q: WeightedDigraph,
                                tol: float = 1e-9) -> SpectrumComparison:
    """Check lambda_k(P) <= lambda_k(Q) for elementwise 0 <= P <= Q.

    The ordering of sorted Laplacian spectra under elementwise adjacency
    domination is a theorem for symmetric nonnegative graphs; this check is a
    test oracle, so a violation is reported (False plus offending index)
    rather than raised. Violating the elementwise precondition raises.
    """
    if p.n_vertices != q.n_vertices:
        raise DimensionMismatchError("graphs must share a vertex count")
    if not (p.is_symmetric() and q.is_symmetric()):
        raise PreconditionViolatedError("both graphs must be symmetric")
    if np.any(p.weights < 0.0) or np.any(p.weights > q.weights + 1e-15):
        raise PreconditionViolatedError("need 0 <= p_ij <= q_ij elementwise")
    spec_p = symmetric_spectrum(laplacian(p))
    spec_q = symmetric_spectrum(laplacian(q))
    bad = np.nonzero(spec_p > spec_q + tol)[0]
    if bad.size:
        return SpectrumComparison(False, spec_p, spec_q, failed_index=int(bad[0]))
    return SpectrumComparison(True, spec_p, spec_q)


def is_complete(g: WeightedDigraph, weight_floor: Optional[float] = None) -> ConnectivityCertificate:
    """Certificate that every ordered vertex pair carries an edge.

    With a symmetric graph and a ``weight_floor`` alpha_m the certificate
    carries the guaranteed fluctuation decay exponent alpha_m * N.
    """
    mask = g.edge_mask()
    n = g.n_vertices
    for i in range(n):
        for j in range(n):
            if i != j and not mask[i, j]:
                return ConnectivityCertificate("Complete", False, witness=(i, j))
            if weight_floor is not None and i != j and g.weights[i, j] < weight_floor:
                return ConnectivityCertificate("Complete", False, witness=(i, j))
    rate = None
    if weight_floor is not None and g.is_symmetric():
        rate = weight_floor * n
    return ConnectivityCertificate("Complete", True, derived_rate=rate)


def is_neighbor_connected(g: WeightedDigraph) -> ConnectivityCertificate:
    """Check that every vertex pair is linked directly or through a shared hub.

    A pair {i, j} qualifies when (i) a directed edge runs between them in at
    least one direction, or (ii) some vertex k is bidirectionally adjacent to
    both, i.e. all four of (i,k), (k,i), (j,k), (k,j) are present. Either
    condition makes the pair's row of the pairwise-error matrix strictly
    row-dominant with margin >= 2 * (minimum edge weight), which is the
    property the exponential-decay estimate consumes.

    The witness is the first failing unordered pair in lexicographic order.
    When the certificate holds, ``derived_rate`` is the minimum present
    |weight| (the guaranteed decay exponent for pairwise distances).
    """
    mask = g.edge_mask()
    n = g.n_vertices
    both = mask & mask.T
    for i in range(n - 1):
        for j in range(i + 1, n):
            if mask[i, j] or mask[j, i]:
                continue
            if np.any(both[i] & both[j]):
                continue
            return ConnectivityCertificate("NeighborConnected", False, witness=(i, j))
    return ConnectivityCertificate(
        "NeighborConnected", True, derived_rate=g.min_present_weight()
    )


def is_strongly_connected(g: WeightedDigraph) -> ConnectivityCertificate:
    """Standard strong connectivity over nonzero-weight edges."""
    mask = g.edge_mask()
    n = g.n_vertices
    forward = _reachable_from(mask, 0)
    backward = _reachable_from(mask.T, 0)
    missing = np.nonzero(~(forward & backward))[0]
    if missing.size:
        v = int(missing[0])
        return ConnectivityCertificate("StronglyConnected", False, witness=(0, v))
    return ConnectivityCertificate("StronglyConnected", True)


def _reachable_from(mask: np.ndarray, start: int) -> np.ndarray:
    n = mask.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        u = stack.pop()
        for v in np.nonzero(mask[u])[0]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return seen


def check_assumption_b(g: WeightedDigraph, gamma_m: float, epsilon: float,
                       n: float) -> ConnectivityCertificate:
    """Verify the bounded-asymmetry weight conditions on a graph.

    Requires a symmetric edge set; every present edge must have symmetric
    mean (w_ij + w_ji)/2 >= gamma_m and antisymmetric part (w_ij - w_ji)/2
    within [-epsilon, epsilon]; every vertex must have at least floor(N/2)
    neighbors. Failures come back as holds=False with the offending pair;
    the measured (min, max) neighbor counts are always reported.
    """
    if gamma_m <= 0.0 or epsilon < 0.0 or n <= 2.0:
        raise PreconditionViolatedError("need gamma_m > 0, epsilon >= 0, n > 2")
    if n * epsilon > gamma_m * (1.0 + 1e-12):
        raise PreconditionViolatedError("need n * epsilon <= gamma_m")
    tol = 1e-12
    mask = g.edge_mask()
    counts = g.neighbor_counts()
    n_min, n_max = int(counts.min()), int(counts.max())
    nr = (n_min, n_max)
    nv = g.n_vertices

    bad = np.nonzero(mask != mask.T)
    if bad[0].size:
        return ConnectivityCertificate("AssumptionB", False,
                                       witness=(int(bad[0][0]), int(bad[1][0])),
                                       neighbor_range=nr)
    if n_min < nv // 2:
        vtx = int(np.argmin(counts))
        return ConnectivityCertificate("AssumptionB", False, witness=(vtx,),
                                       neighbor_range=nr)
    w = g.weights
    for i in range(nv - 1):
        for j in range(i + 1, nv):
            if not mask[i, j]:
                continue
            mean = 0.5 * (w[i, j] + w[j, i])
            anti = 0.5 * (w[i, j] - w[j, i])
            if mean < gamma_m - tol or abs(anti) > epsilon + tol:
                return ConnectivityCertificate("AssumptionB", False, witness=(i, j),
                                               neighbor_range=nr)
    return ConnectivityCertificate("AssumptionB", True, neighbor_range=nr)


# ---------------------------------------------------------------------------
# Temporal graphs
# ---------------------------------------------------------------------------

class TemporalGraph:
    """Piecewise-constant-in-time graph.

    The graph at time t is the piece with the largest switch time <= t;
    switches happen at most finitely often on any bounded interval.
    """

    def graph_at(self, t: float) -> WeightedDigraph:
        raise NotImplementedError

    def piece_index(self, t: float) -> int:
        raise NotImplementedError


@dataclass
class TemporalSchedule(TemporalGraph):
    """Explicit ordered list of (switch_time, graph) pieces starting at 0."""

    entries: list = field(default_factory=list)

    def __post_init__(self):
        if not self.entries:
            raise PreconditionViolatedError("schedule needs at least one entry")
        times = [t for t, _ in self.entries]
        if times[0] != 0.0:
            raise PreconditionViolatedError("first switch time must be 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise PreconditionViolatedError("switch times must increase strictly")
        self._times = times

    def piece_index(self, t: float) -> int:
        if t < 0.0:
            raise PreconditionViolatedError("time must be nonnegative")
        return bisect_right(self._times, t) - 1

    def graph_at(self, t: float) -> WeightedDigraph:
        return self.entries[self.piece_index(t)][1]

    @property
    def switch_times(self) -> list:
        return list(self._times)


@dataclass
class PeriodicTemporal(TemporalGraph):
    """Lazily generated schedule: piece k covers [k * period, (k+1) * period).

    ``builder(k)`` must return the piece deterministically; randomized
    builders should derive their generator from the piece index so the
    schedule is reproducible and never materialized in full.
    """

    period: float
    builder: Callable[[int], WeightedDigraph]

    def __post_init__(self):
        if self.period <= 0.0:
            raise PreconditionViolatedError("period must be positive")
        self._cache_index = -1
        self._cache_graph = None

    def piece_index(self, t: float) -> int:
        if t < 0.0:
            raise PreconditionViolatedError("time must be nonnegative")
        return int(t / self.period)

    def graph_at(self, t: float) -> WeightedDigraph:
        k = self.piece_index(t)
        if k != self._cache_index:
            self._cache_graph = self.builder(k)
            self._cache_index = k
        return self._cache_graph


def constant_temporal(g: WeightedDigraph) -> TemporalSchedule:
    """Single-piece schedule for a static graph."""
    return TemporalSchedule([(0.0, g)])


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def graph_to_json(g: WeightedDigraph) -> str:
    return json.dumps({"n": g.n_vertices, "weights": g.weights.tolist()})


def graph_from_json(text: str) -> WeightedDigraph:
    obj = json.loads(text)
    w = np.asarray(obj["weights"], dtype=float)
    if w.shape != (obj["n"], obj["n"]):
        raise DimensionMismatchError("weight matrix shape disagrees with n")
    return WeightedDigraph(w)


def graph_to_csv(g: WeightedDigraph) -> str:
    """Edge list ``i,j,w`` with 0-based indices, header included."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j", "w"])
    rows, cols = np.nonzero(g.edge_mask())
    for i, j in zip(rows, cols):
        writer.writerow([int(i), int(j), repr(float(g.weights[i, j]))])
    return buf.getvalue()


def graph_from_csv(text: str, n_vertices: Optional[int] = None) -> WeightedDigraph:
    """Rebuild a graph from an ``i,j,w`` edge list.

    Isolated trailing vertices are not recoverable from edges alone, so pass
    ``n_vertices`` when the exact size matters.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header[:3]] != ["i", "j", "w"]:
        raise PreconditionViolatedError("expected header 'i,j,w'")
    edges = [(int(r[0]), int(r[1]), float(r[2])) for r in reader if r]
    size = n_vertices if n_vertices is not None else (
        max((max(i, j) for i, j, _ in edges), default=-1) + 1
    )
    if size < 1:
        raise InvalidSizeError("cannot infer a positive vertex count")
    w = np.zeros((size, size))
    for i, j, weight in edges:
        w[i, j] = weight
    return WeightedDigraph(w)
