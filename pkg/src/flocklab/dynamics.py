"""Particle/opinion models and the fixed-step RK4 integrator.

Four right-hand sides live here: the adaptive alignment model (couplings
relax toward velocity similarity), its fast-adaptation limit (couplings
instantaneously equal the similarity), the classical distance-kernel
alignment model, and linear consensus dynamics driven by a (possibly
temporal) graph Laplacian. The first three integrate through compiled
kernels; the graph-driven linear system steps in numpy with the active
graph piece re-resolved at every RK4 stage.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import (
    DegenerateVelocityError,
    DimensionMismatchError,
    NonFiniteError,
    PreconditionViolatedError,
)
from .graphs import TemporalGraph, WeightedDigraph, laplacian

VELOCITY_NORM_TOL = _kernels.VELOCITY_NORM_TOL

MODELS = ("adaptive_cs", "singular_cs", "classical_cs", "laplacian")


@dataclass
class ParticleEnsemble:
    """Positions and velocities of N agents in n-dimensional space."""

    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.positions, dtype=float))
        v = np.atleast_2d(np.asarray(self.velocities, dtype=float))
        if x.shape != v.shape:
            raise DimensionMismatchError(f"positions {x.shape} vs velocities {v.shape}")
        if not (np.isfinite(x).all() and np.isfinite(v).all()):
            raise PreconditionViolatedError("state entries must be finite")
        self.positions, self.velocities = x, v

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


@dataclass
class CouplingMatrix:
    """Pairwise coupling strengths; stays inside [-1, 1] along trajectories
    whenever it starts there."""

    kappa: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise DimensionMismatchError(f"coupling matrix must be square, got {k.shape}")
        self.kappa = k


@dataclass
class ModelParams:
    """Which model to run and its scalar parameters."""

    model: str
    radius_d: float = 1.0
    kappa_global: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise PreconditionViolatedError(f"model must be one of {MODELS}")
        if self.radius_d <= 0.0:
            raise PreconditionViolatedError("radius_d must be positive")
        if self.kappa_global < 0.0 or self.epsilon < 0.0:
            raise PreconditionViolatedError("kappa_global and epsilon must be >= 0")


@dataclass
class TrajectoryRecord:
    """Time-sampled states plus run-level extrema and derived metric series.

    ``positions`` holds the evolving state; for the graph-driven linear model
    that is the consensus state itself and ``velocities`` is None.
    ``max_pairwise_distance`` and ``min_similarity`` are tracked at every
    integration step, not just at samples.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: Optional[np.ndarray] = None
    kappas: Optional[np.ndarray] = None
    final_kappa: Optional[np.ndarray] = None
    kappa_range: Optional[tuple] = None
    max_pairwise_distance: Optional[float] = None
    min_similarity: Optional[float] = None
    derived: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return len(self.times)

    def state_at(self, index: int) -> ParticleEnsemble:
        v = self.velocities[index] if self.velocities is not None \
            else np.zeros_like(self.positions[index])
        return ParticleEnsemble(self.positions[index].copy(), v.copy())

    def sample_index_at(self, t: float, tol: float = 1e-9) -> int:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > tol:
            raise PreconditionViolatedError(f"no sample at t={t}")
        return idx


def similarity(v_i: np.ndarray, v_j: np.ndarray) -> float:
    """Cosine of the angle between two velocities, clamped to [-1, 1].

    Undefined (raises) when either norm falls below tolerance: the model
    divides by |v_i||v_j| and silently redefining it would hide leaving the
    model's domain.
    """
    v_i = np.asarray(v_i, dtype=float)
    v_j = np.asarray(v_j, dtype=float)
    ni, nj = np.linalg.norm(v_i), np.linalg.norm(v_j)
    if ni < VELOCITY_NORM_TOL or nj < VELOCITY_NORM_TOL:
        raise DegenerateVelocityError(f"velocity norm below {VELOCITY_NORM_TOL}")
    return float(np.clip(v_i @ v_j / (ni * nj), -1.0, 1.0))


def similarity_matrix(velocities: np.ndarray) -> np.ndarray:
    """All pairwise velocity cosines; diagonal is 1."""
    v = np.asarray(velocities, dtype=float)
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms < VELOCITY_NORM_TOL):
        bad = int(np.argmin(norms))
        raise DegenerateVelocityError(f"velocity norm of particle {bad} below tolerance")
    return np.clip((v @ v.T) / np.outer(norms, norms), -1.0, 1.0)


def neighborhood(positions: np.ndarray, radius_d: float) -> tuple:
    """Neighborhood indicator and per-particle neighbor counts.

    psi[i, j] is True exactly when ||x_i - x_j|| < radius_d (strictly), so
    psi[i, i] is always True and every count is at least 1.
    """
    if radius_d <= 0.0:
        raise PreconditionViolatedError("radius_d must be positive")
    x = np.atleast_2d(np.asarray(positions, dtype=float))
    diff = x[:, None, :] - x[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    psi = dist2 < radius_d * radius_d
    return psi, psi.sum(axis=1).astype(np.int64)


def _gated_alignment(weights: np.ndarray, counts: np.ndarray, v: np.ndarray) -> np.ndarray:
    # sum_j w_ij (v_j - v_i), normalized by counts
    return (weights @ v - weights.sum(axis=1)[:, None] * v) / counts[:, None]


def rhs_adaptive_cs(state: ParticleEnsemble, coupling: CouplingMatrix,
                    params: ModelParams) -> tuple:
    """Derivatives (dx, dv, dkappa) of the adaptive alignment model.

    dv_i = (kappa_global / I_i) sum_j psi_ij kappa_ij (v_j - v_i) and every
    coupling relaxes toward the pair's velocity cosine at rate epsilon,
    whether or not the pair is inside the interaction radius.
    """
    psi, counts = neighborhood(state.positions, params.radius_d)
    a = similarity_matrix(state.velocities)
    gated = psi * coupling.kappa
    dv = params.kappa_global * _gated_alignment(gated, counts, state.velocities)
    dkappa = params.epsilon * (a - coupling.kappa)
    return state.velocities.copy(), dv, dkappa


def rhs_singular_cs(state: ParticleEnsemble, params: ModelParams) -> tuple:
    """Derivatives (dx, dv) of the fast-adaptation limit: couplings equal
    the velocity cosines instantaneously."""
    psi, counts = neighborhood(state.positions, params.radius_d)
    a = similarity_matrix(state.velocities)
    dv = params.kappa_global * _gated_alignment(psi * a, counts, state.velocities)
    return state.velocities.copy(), dv


def rhs_classical_cs(state: ParticleEnsemble, params: ModelParams) -> tuple:
    """Derivatives (dx, dv) of the distance-kernel alignment model:
    dv_i = (1/I_i) sum_j psi_ij (1 + ||x_i - x_j||^2)^(-1/2) (v_j - v_i)."""
    x = state.positions
    psi, counts = neighborhood(x, params.radius_d)
    diff = x[:, None, :] - x[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    kern = psi / np.sqrt(1.0 + dist2)
    dv = _gated_alignment(kern, counts, state.velocities)
    return state.velocities.copy(), dv


def rhs_laplacian(x: np.ndarray, g: WeightedDigraph) -> np.ndarray:
    """dx_i = sum_j A_ij (x_j - x_i), i.e. -(L x), applied columnwise."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != g.n_vertices:
        raise DimensionMismatchError(
            f"state has {x.shape[0]} rows for a {g.n_vertices}-vertex graph"
        )
    return -(laplacian(g).entries @ x)


def _sample_steps(n_steps: int, sample_every: int) -> np.ndarray:
    steps = list(range(0, n_steps + 1, sample_every))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.asarray(steps, dtype=np.int64)


def _check_finite(times: np.ndarray, *arrays) -> None:
    for arr in arrays:
        if arr is None:
            continue
        finite = np.isfinite(arr).reshape(arr.shape[0], -1).all(axis=1)
        if not finite.all():
            bad = int(np.argmin(finite))
            raise NonFiniteError("state overflowed during integration",
                                 time=float(times[bad]))


def integrate(params: ModelParams, state: ParticleEnsemble, horizon_t: float,
              dt: float, sample_every: int = 1,
              coupling: Optional[CouplingMatrix] = None,
              temporal_graph: Optional[TemporalGraph] = None,
              record_kappa: bool = False) -> TrajectoryRecord:
    """Classical RK4 with a fixed step.

    The interaction structure (neighborhoods, normalizers, the active graph
    piece) is re-evaluated at each RK4 stage from that stage's state and
    time; the vector field is evaluated as-is across its discontinuity
    surfaces, which is sound because switches happen at most countably often.
    Samples are recorded every ``sample_every`` steps plus at t=0 and t=T.
    """
    if horizon_t <= 0.0 or dt <= 0.0:
        raise PreconditionViolatedError("need horizon_t > 0 and dt > 0")
    if sample_every < 1:
        raise PreconditionViolatedError("sample_every must be a positive integer")
    n_steps = int(round(horizon_t / dt))
    if n_steps < 1 or abs(n_steps * dt - horizon_t) > 1e-9 * max(1.0, abs(horizon_t)):
        raise PreconditionViolatedError("dt must divide the horizon")
    steps = _sample_steps(n_steps, sample_every)
    times = steps * dt

    if params.model == "laplacian":
        if temporal_graph is None:
            raise PreconditionViolatedError("laplacian mode needs a temporal graph")
        samples = _integrate_laplacian(state.positions, temporal_graph, dt, n_steps, steps)
        _check_finite(times, samples)
        return TrajectoryRecord(times=times, positions=samples)

    n, dim = state.positions.shape
    out_x = np.empty((len(steps), n, dim))
    out_v = np.empty((len(steps), n, dim))
    x = state.positions.copy()
    v = state.velocities.copy()

    if params.model == "singular_cs":
        status, event_step, max_dist, min_sim = _kernels.rk4_singular(
            x, v, params.kappa_global, params.radius_d, dt, n_steps, steps,
            out_x, out_v)
        _raise_for_status(status, event_step, dt)
        record = TrajectoryRecord(times=times, positions=out_x, velocities=out_v,
                                  max_pairwise_distance=max_dist,
                                  min_similarity=min_sim)
    elif params.model == "classical_cs":
        status, event_step, max_dist = _kernels.rk4_classical(
            x, v, params.radius_d, dt, n_steps, steps, out_x, out_v)
        _raise_for_status(status, event_step, dt)
        record = TrajectoryRecord(times=times, positions=out_x, velocities=out_v,
                                  max_pairwise_distance=max_dist)
    elif params.model == "adaptive_cs":
        if coupling is None:
            raise PreconditionViolatedError("adaptive mode needs a coupling matrix")
        if coupling.kappa.shape != (n, n):
            raise DimensionMismatchError("coupling matrix shape disagrees with state")
        kap = coupling.kappa.copy()
        out_k = np.empty((len(steps) if record_kappa else 1, n, n))
        status, event_step, max_dist, min_sim, kmin, kmax = _kernels.rk4_adaptive(
            x, v, kap, params.kappa_global, params.epsilon, params.radius_d,
            dt, n_steps, steps, out_x, out_v, out_k, record_kappa)
        _raise_for_status(status, event_step, dt)
        if not record_kappa:
            out_k[0] = kap
        record = TrajectoryRecord(times=times, positions=out_x, velocities=out_v,
                                  kappas=out_k if record_kappa else None,
                                  final_kappa=kap,
                                  kappa_range=(float(kmin), float(kmax)),
                                  max_pairwise_distance=max_dist,
                                  min_similarity=min_sim)
        _check_finite(times, out_x, out_v, record.kappas)
        return record
    else:  # pragma: no cover - guarded by ModelParams
        raise PreconditionViolatedError(f"unknown model {params.model}")

    _check_finite(times, out_x, out_v)
    return record


def _raise_for_status(status: int, event_step: int, dt: float) -> None:
    if status == 1:
        raise DegenerateVelocityError(
            f"velocity norm fell below tolerance at t={event_step * dt:.6g}",
            time=event_step * dt)
    if status == 2:
        raise NonFiniteError(
            f"state became non-finite at t={event_step * dt:.6g}",
            time=event_step * dt)


def _integrate_laplacian(x0: np.ndarray, tg: TemporalGraph, dt: float,
                         n_steps: int, steps: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    samples = np.empty((len(steps),) + x.shape)
    cache_idx = -1
    cache_lap = None

    def lap_at(t: float) -> np.ndarray:
        nonlocal cache_idx, cache_lap
        k = tg.piece_index(t)
        if k != cache_idx:
            cache_lap = laplacian(tg.graph_at(t)).entries
            cache_idx = k
        return cache_lap

    slot = 0
    if steps[slot] == 0:
        samples[slot] = x
        slot += 1
    half = 0.5 * dt
    for step in range(n_steps):
        t = step * dt
        k1 = -(lap_at(t) @ x)
        mid = lap_at(t + half)
        k2 = -(mid @ (x + half * k1))
        k3 = -(mid @ (x + half * k2))
        k4 = -(lap_at(t + dt) @ (x + dt * k3))
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if slot < len(steps) and steps[slot] == step + 1:
            samples[slot] = x
            slot += 1
    return samples
