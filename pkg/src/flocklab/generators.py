"""Constructors for the example graph families and their admissibility checks.

Covers leader (star-like) graphs, the cyclically-coupled three-group digraph,
banded circulant regular graphs, the two-overlapping-cliques family with
prescribed neighbor-count bounds, weight perturbation around a floor, and the
arithmetic certificates (margin minimization, coupling ratio) that decide
whether a configuration admits an exponential consensus rate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DivisionDegenerateError,
    InvalidSizeError,
    PreconditionViolatedError,
)
from .graphs import PeriodicTemporal, TemporalGraph, TemporalSchedule, WeightedDigraph

LEADER_MODES = ("FixedOne", "FixedTwo", "SwitchingOne", "SwitchingTwo", "MixedOneTwo")


def _piece_rng(seed: int, piece: int) -> np.random.Generator:
    """Deterministic per-piece generator from a counter-based bit stream."""
    return np.random.Generator(np.random.Philox(key=seed + ((piece + 1) << 64)))


def one_leader(n: int, weight: float = 1.0, leader: int = 0) -> WeightedDigraph:
    """Star graph: one designated vertex adjacent (both ways) to all others."""
    if n < 2:
        raise InvalidSizeError("one-leader graph needs n >= 2")
    if weight <= 0.0:
        raise PreconditionViolatedError("weight must be positive")
    w = np.zeros((n, n))
    w[leader, :] = weight
    w[:, leader] = weight
    w[leader, leader] = 0.0
    return WeightedDigraph(w)


def two_leaders(n: int, weight: float = 1.0, leaders: tuple = (0, None)) -> WeightedDigraph:
    """Two vertices each adjacent to all non-leaders; no edge between leaders."""
    if n < 3:
        raise InvalidSizeError("two-leaders graph needs n >= 3")
    if weight <= 0.0:
        raise PreconditionViolatedError("weight must be positive")
    l1, l2 = leaders
    if l2 is None:
        l2 = n - 1
    if l1 == l2:
        raise InvalidSizeError("leaders must be distinct")
    w = np.zeros((n, n))
    for lead in (l1, l2):
        w[lead, :] = weight
        w[:, lead] = weight
    w[l1, l2] = w[l2, l1] = 0.0
    np.fill_diagonal(w, 0.0)
    return WeightedDigraph(w)


@dataclass
class LeaderSchedule:
    """How the leader set of a temporal leader graph evolves.

    Switching modes redraw the leader set uniformly at every period boundary
    (the previous leaders are not excluded); the mixed mode alternates
    one-leader and two-leaders pieces in a half-and-half ratio.
    """

    mode: str
    period: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in LEADER_MODES:
            raise PreconditionViolatedError(f"mode must be one of {LEADER_MODES}")
        if self.mode not in ("FixedOne", "FixedTwo") and self.period <= 0.0:
            raise PreconditionViolatedError("switching modes need period > 0")


def leader_temporal(n: int, weight: float, schedule: LeaderSchedule,
                    horizon: float) -> TemporalGraph:
    """Temporal one/two-leader graph under the given switching schedule."""
    if horizon <= 0.0:
        raise PreconditionViolatedError("horizon must be positive")
    if schedule.mode == "FixedOne":
        return TemporalSchedule([(0.0, one_leader(n, weight))])
    if schedule.mode == "FixedTwo":
        return TemporalSchedule([(0.0, two_leaders(n, weight))])

    def build(piece: int) -> WeightedDigraph:
        rng = _piece_rng(schedule.seed, piece)
        want_two = schedule.mode == "SwitchingTwo" or (
            schedule.mode == "MixedOneTwo" and piece % 2 == 1
        )
        if want_two:
            l1, l2 = rng.choice(n, size=2, replace=False)
            return two_leaders(n, weight, leaders=(int(l1), int(l2)))
        return one_leader(n, weight, leader=int(rng.integers(n)))

    return PeriodicTemporal(schedule.period, build)


def three_group_directed(sizes: tuple, weight: float = 1.0) -> WeightedDigraph:
    """Three groups, complete inside, cyclic directed coupling between them.

    Each group induces a directed complete graph (both directions); across
    groups only the blocks group1 -> group2 -> group3 -> group1 are filled.
    """
    n1, n2, n3 = sizes
    if min(n1, n2, n3) < 1:
        raise InvalidSizeError("all three groups must be nonempty")
    if weight <= 0.0:
        raise PreconditionViolatedError("weight must be positive")
    n = n1 + n2 + n3
    groups = [range(0, n1), range(n1, n1 + n2), range(n1 + n2, n)]
    w = np.zeros((n, n))
    for g in groups:
        for i in g:
            for j in g:
                if i != j:
                    w[i, j] = weight
    for src, dst in ((0, 1), (1, 2), (2, 0)):
        for i in groups[src]:
            for j in groups[dst]:
                w[i, j] = weight
    return WeightedDigraph(w)


def random_three_group_partition(n: int, weight: float, rng: np.random.Generator) -> WeightedDigraph:
    """Three-group digraph over a uniformly drawn partition into nonempty groups."""
    if n < 3:
        raise InvalidSizeError("need n >= 3 for three nonempty groups")
    perm = rng.permutation(n)
    # Two distinct cut points in [1, n-1] delimit nonempty groups.
    cuts = np.sort(rng.choice(np.arange(1, n), size=2, replace=False))
    sizes = (int(cuts[0]), int(cuts[1] - cuts[0]), int(n - cuts[1]))
    base = three_group_directed(sizes, weight).weights
    w = np.zeros((n, n))
    w[np.ix_(perm, perm)] = base
    return WeightedDigraph(w)


def three_group_temporal(n: int, weight: float, period: float, seed: int) -> TemporalGraph:
    """Temporal three-group digraph, repartitioned uniformly every period."""
    if period <= 0.0:
        raise PreconditionViolatedError("period must be positive")

    def build(piece: int) -> WeightedDigraph:
        return random_three_group_partition(n, weight, _piece_rng(seed, piece))

    return PeriodicTemporal(period, build)


def circulant_regular(n: int, k: int, weight: float = 1.0) -> WeightedDigraph:
    """Vertex-transitive k-regular graph: k/2 nearest neighbors on each side."""
    if n < 3:
        raise InvalidSizeError("circulant graph needs n >= 3")
    if k % 2 != 0 or not (0 < k < n):
        raise InvalidSizeError("degree k must be even with 0 < k < n")
    half = k // 2
    w = np.zeros((n, n))
    for i in range(n):
        for off in range(1, half + 1):
            w[i, (i + off) % n] = weight
            w[i, (i - off) % n] = weight
    return WeightedDigraph(w)


def overlapping_cliques(n: int, n_min: int, n_max: int, weight: float = 1.0) -> WeightedDigraph:
    """Two overlapping cliques realizing neighbor counts inside [n_min, n_max].

    Vertices 0..n_max form one clique; the last n_min + 1 vertices form a
    second; edges lying in both cliques are removed. Admissibility requires
    (2/3)(N-1) >= n_min and 2(N-1-n_min) >= n_max on top of
    floor(N/2) <= n_min <= n_max < N. Measured degrees are re-checked after
    construction.
    """
    if not (n // 2 <= n_min <= n_max < n):
        raise PreconditionViolatedError("need floor(N/2) <= n_min <= n_max < N")
    if not (2.0 * (n - 1) / 3.0 >= n_min and 2 * (n - 1 - n_min) >= n_max):
        raise PreconditionViolatedError("neighbor-count bounds are not realizable")
    first = set(range(0, n_max + 1))
    second = set(range(n - n_min - 1, n))
    overlap = first & second
    w = np.zeros((n, n))
    for clique in (first, second):
        for i in clique:
            for j in clique:
                if i != j:
                    w[i, j] = weight
    for i in overlap:
        for j in overlap:
            w[i, j] = 0.0
    g = WeightedDigraph(w)
    counts = g.neighbor_counts()
    if counts.min() < n_min or counts.max() > n_max:
        raise PreconditionViolatedError(
            f"construction produced degrees [{counts.min()}, {counts.max()}] "
            f"outside [{n_min}, {n_max}]"
        )
    return g


def perturb_weights(g: WeightedDigraph, gamma_m: float, epsilon: float,
                    seed: int) -> WeightedDigraph:
    """Randomize a uniform-weight symmetric graph around its weight floor.

    Each undirected edge {i, j} receives (w_ij, w_ji) = (gamma_m - d1,
    gamma_m + d2) with d1 <= d2 drawn from [-epsilon, epsilon] with a common
    sign, so the symmetric mean stays >= gamma_m and the antisymmetric part
    stays within [-epsilon, epsilon].
    """
    if epsilon < 0.0:
        raise PreconditionViolatedError("epsilon must be nonnegative")
    if not g.is_symmetric():
        raise PreconditionViolatedError("input graph must be symmetric")
    mask = g.edge_mask()
    present = g.weights[mask]
    if present.size and np.max(np.abs(present - gamma_m)) > 1e-12:
        raise PreconditionViolatedError("input weights must all equal gamma_m")
    if epsilon == 0.0:
        return WeightedDigraph(g.weights.copy())
    rng = np.random.Generator(np.random.Philox(key=seed))
    n = g.n_vertices
    w = g.weights.copy()
    for i in range(n - 1):
        for j in range(i + 1, n):
            if not mask[i, j]:
                continue
            u = np.sort(rng.uniform(0.0, epsilon, size=2))
            if rng.integers(2) == 0:
                d1, d2 = u[0], u[1]
            else:
                d1, d2 = -u[1], -u[0]
            w[i, j] = gamma_m - d1
            w[j, i] = gamma_m + d2
    return WeightedDigraph(w)


def assumption_b_margin(n: int, n_min: int, n_max: int, ratio: float) -> tuple:
    """Minimize the rate margin over the admissible sign-group sizes.

    Evaluates f(s) = (ratio-2)/(s(ratio-1)) * (n_min - s + 1)
    - 2/(ratio+1)^2 * (3 s^2 - (n_max + 2 n_min + 1) s + n * n_max) at every
    integer s in [1, floor(n/2)] and returns (min value, argmin). A positive
    minimum certifies the configuration with margin delta = that value; a
    negative result is informative, not an error.
    """
    if ratio <= 2.0:
        raise PreconditionViolatedError("ratio must exceed 2")
    if not (1 <= n_min <= n_max < n):
        raise PreconditionViolatedError("need 1 <= n_min <= n_max < n")
    best_val, best_s = np.inf, 1
    for s in range(1, n // 2 + 1):
        val = (ratio - 2.0) / (s * (ratio - 1.0)) * (n_min - s + 1) \
            - 2.0 / (ratio + 1.0) ** 2 * (3.0 * s * s - (n_max + 2 * n_min + 1) * s + n * n_max)
        if val < best_val:
            best_val, best_s = val, s
    return float(best_val), best_s


def corollary3_ratio(a_m: float, n_min: int, n_max: int) -> float:
    """Coupling ratio 2 a_m (n_min+1) / (n_max+1 - a_m (n_min+1)).

    The caller decides whether the returned ratio clears the > 2 threshold.
    """
    if not (0.0 < a_m < 1.0):
        raise PreconditionViolatedError("a_m must lie in (0, 1)")
    denom = (n_max + 1) - a_m * (n_min + 1)
    if denom <= 0.0:
        raise DivisionDegenerateError("denominator n_max + 1 - a_m (n_min + 1) <= 0")
    return 2.0 * a_m * (n_min + 1) / denom
