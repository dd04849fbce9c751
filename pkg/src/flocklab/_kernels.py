"""Compiled fixed-step RK4 drivers for the particle models.

Each driver advances the full trajectory in one call so the hot loops stay
out of the interpreter. Stage derivatives re-derive the interaction kernel
(neighborhood indicator, per-vertex normalizer, velocity similarity) from the
stage's own state, so discontinuity surfaces are handled pointwise. The
indicator and the similarity are symmetric, so stages visit each unordered
pair once. Status codes: 0 ok, 1 degenerate velocity norm, 2 non-finite
state.
"""
import math

import numpy as np
from numba import njit

VELOCITY_NORM_TOL = 1e-12


@njit(cache=True)
def _stage_singular(x, v, kappa_g, d2, norms, counts, out_dv, track):
    """Acceleration of the similarity-weighted alignment model.

    Returns (status, max_dist2, min_sim); the extrema are only meaningful
    when ``track`` is set (pass it at the step's first stage), with min_sim
    taken over pairs inside the interaction radius.
    """
    n, dim = x.shape
    max_dist2 = 0.0
    min_sim = 1.0
    for i in range(n):
        s = 0.0
        for k in range(dim):
            s += v[i, k] * v[i, k]
        nr = math.sqrt(s)
        if nr < VELOCITY_NORM_TOL:
            return 1, max_dist2, min_sim
        norms[i] = nr
    for i in range(n):
        counts[i] = 1  # self: distance 0 < d
        for k in range(dim):
            out_dv[i, k] = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dist2 = 0.0
            for k in range(dim):
                dd = x[i, k] - x[j, k]
                dist2 += dd * dd
            if track and dist2 > max_dist2:
                max_dist2 = dist2
            if dist2 < d2:
                counts[i] += 1
                counts[j] += 1
                dot = 0.0
                for k in range(dim):
                    dot += v[i, k] * v[j, k]
                a = dot / (norms[i] * norms[j])
                if a > 1.0:
                    a = 1.0
                elif a < -1.0:
                    a = -1.0
                if track and a < min_sim:
                    min_sim = a
                for k in range(dim):
                    diff = a * (v[j, k] - v[i, k])
                    out_dv[i, k] += diff
                    out_dv[j, k] -= diff
    for i in range(n):
        scale = kappa_g / counts[i]
        for k in range(dim):
            out_dv[i, k] *= scale
    return 0, max_dist2, min_sim


@njit(cache=True)
def _stage_adaptive(x, v, kap, kappa_g, eps, d2, norms, counts, out_dv, out_dk, track):
    """Acceleration plus coupling drift of the adaptive model.

    Couplings relax toward the velocity similarity for every ordered pair,
    gated by nothing; only the acceleration is gated by the neighborhood
    indicator. min_sim is tracked over all pairs.
    """
    n, dim = x.shape
    max_dist2 = 0.0
    min_sim = 1.0
    for i in range(n):
        s = 0.0
        for k in range(dim):
            s += v[i, k] * v[i, k]
        nr = math.sqrt(s)
        if nr < VELOCITY_NORM_TOL:
            return 1, max_dist2, min_sim
        norms[i] = nr
    for i in range(n):
        counts[i] = 1
        out_dk[i, i] = eps * (1.0 - kap[i, i])
        for k in range(dim):
            out_dv[i, k] = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dot = 0.0
            for k in range(dim):
                dot += v[i, k] * v[j, k]
            a = dot / (norms[i] * norms[j])
            if a > 1.0:
                a = 1.0
            elif a < -1.0:
                a = -1.0
            if track and a < min_sim:
                min_sim = a
            out_dk[i, j] = eps * (a - kap[i, j])
            out_dk[j, i] = eps * (a - kap[j, i])
            dist2 = 0.0
            for k in range(dim):
                dd = x[i, k] - x[j, k]
                dist2 += dd * dd
            if track and dist2 > max_dist2:
                max_dist2 = dist2
            if dist2 < d2:
                counts[i] += 1
                counts[j] += 1
                for k in range(dim):
                    diff = v[j, k] - v[i, k]
                    out_dv[i, k] += kap[i, j] * diff
                    out_dv[j, k] -= kap[j, i] * diff
    for i in range(n):
        scale = kappa_g / counts[i]
        for k in range(dim):
            out_dv[i, k] *= scale
    return 0, max_dist2, min_sim


@njit(cache=True)
def _stage_classical(x, v, d2, counts, out_dv, track):
    """Acceleration of the distance-kernel alignment model."""
    n, dim = x.shape
    max_dist2 = 0.0
    for i in range(n):
        counts[i] = 1
        for k in range(dim):
            out_dv[i, k] = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dist2 = 0.0
            for k in range(dim):
                dd = x[i, k] - x[j, k]
                dist2 += dd * dd
            if track and dist2 > max_dist2:
                max_dist2 = dist2
            if dist2 < d2:
                counts[i] += 1
                counts[j] += 1
                w = 1.0 / math.sqrt(1.0 + dist2)
                for k in range(dim):
                    diff = w * (v[j, k] - v[i, k])
                    out_dv[i, k] += diff
                    out_dv[j, k] -= diff
    for i in range(n):
        for k in range(dim):
            out_dv[i, k] /= counts[i]
    return 0, max_dist2


@njit(cache=True)
def rk4_singular(x, v, kappa_g, d, dt, n_steps, sample_steps, out_x, out_v):
    """Integrate the similarity-weighted model in place; sample into out_*.

    Returns (status, event_step, max_pairwise_distance, min_similarity); the
    extrema are tracked at every step start.
    """
    n, dim = x.shape
    d2 = d * d
    norms = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    xs = np.empty((n, dim))
    vs = np.empty((n, dim))
    av = np.empty((n, dim))
    acc_x = np.empty((n, dim))
    acc_v = np.empty((n, dim))
    run_max_d2 = 0.0
    run_min_sim = 1.0
    slot = 0
    if sample_steps[slot] == 0:
        out_x[slot] = x
        out_v[slot] = v
        slot += 1
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(n_steps):
        status, md2, ms = _stage_singular(x, v, kappa_g, d2, norms, counts, av, True)
        if status != 0:
            return status, step, math.sqrt(run_max_d2), run_min_sim
        if md2 > run_max_d2:
            run_max_d2 = md2
        if ms < run_min_sim:
            run_min_sim = ms
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] = v[i, k]
                acc_v[i, k] = av[i, k]
                xs[i, k] = x[i, k] + half * v[i, k]
                vs[i, k] = v[i, k] + half * av[i, k]
        status, md2, ms = _stage_singular(xs, vs, kappa_g, d2, norms, counts, av, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2), run_min_sim
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] += 2.0 * vs[i, k]
                acc_v[i, k] += 2.0 * av[i, k]
                xs[i, k] = x[i, k] + half * vs[i, k]
                vs[i, k] = v[i, k] + half * av[i, k]
        status, md2, ms = _stage_singular(xs, vs, kappa_g, d2, norms, counts, av, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2), run_min_sim
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] += 2.0 * vs[i, k]
                acc_v[i, k] += 2.0 * av[i, k]
                xs[i, k] = x[i, k] + dt * vs[i, k]
                vs[i, k] = v[i, k] + dt * av[i, k]
        status, md2, ms = _stage_singular(xs, vs, kappa_g, d2, norms, counts, av, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2), run_min_sim
        for i in range(n):
            for k in range(dim):
                x[i, k] += sixth * (acc_x[i, k] + vs[i, k])
                v[i, k] += sixth * (acc_v[i, k] + av[i, k])
        if slot < len(sample_steps) and sample_steps[slot] == step + 1:
            out_x[slot] = x
            out_v[slot] = v
            slot += 1
    status, md2, ms = _stage_singular(x, v, kappa_g, d2, norms, counts, av, True)
    if status == 0:
        if md2 > run_max_d2:
            run_max_d2 = md2
        if ms < run_min_sim:
            run_min_sim = ms
    return 0, n_steps, math.sqrt(run_max_d2), run_min_sim


@njit(cache=True)
def rk4_adaptive(x, v, kap, kappa_g, eps, d, dt, n_steps, sample_steps,
                 out_x, out_v, out_k, record_kappa):
    """Integrate the adaptive model; track the coupling range over all steps.

    Returns (status, event_step, max_pairwise_distance, min_similarity,
    kappa_min, kappa_max).
    """
    n, dim = x.shape
    d2 = d * d
    norms = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    xs = np.empty((n, dim))
    vs = np.empty((n, dim))
    ks = np.empty((n, n))
    av = np.empty((n, dim))
    ak = np.empty((n, n))
    acc_x = np.empty((n, dim))
    acc_v = np.empty((n, dim))
    acc_k = np.empty((n, n))
    run_max_d2 = 0.0
    run_min_sim = 1.0
    kmin = np.inf
    kmax = -np.inf
    for i in range(n):
        for j in range(n):
            if kap[i, j] < kmin:
                kmin = kap[i, j]
            if kap[i, j] > kmax:
                kmax = kap[i, j]
    slot = 0
    if sample_steps[slot] == 0:
        out_x[slot] = x
        out_v[slot] = v
        if record_kappa:
            out_k[slot] = kap
        slot += 1
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(n_steps):
        status, md2, ms = _stage_adaptive(x, v, kap, kappa_g, eps, d2,
                                          norms, counts, av, ak, True)
        if status != 0:
            return status, step, math.sqrt(run_max_d2), run_min_sim, kmin, kmax
        if md2 > run_max_d2:
            run_max_d2 = md2
        if ms < run_min_sim:
            run_min_sim = ms
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] = v[i, k]
                acc_v[i, k] = av[i, k]
                xs[i, k] = x[i, k] + half * v[i, k]
                vs[i, k] = v[i, k] + half * av[i, k]
            for j in range(n):
                acc_k[i, j] = ak[i, j]
                ks[i, j] = kap[i, j] + half * ak[i, j]
        status, md2, ms = _stage_adaptive(xs, vs, ks, kappa_g, eps, d2,
                                          norms, counts, av, ak, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2), run_min_sim, kmin, kmax
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] += 2.0 * vs[i, k]
                acc_v[i, k] += 2.0 * av[i, k]
                xs[i, k] = x[i, k] + half * vs[i, k]
                vs[i, k] = v[i, k] + half * av[i, k]
            for j in range(n):
                acc_k[i, j] += 2.0 * ak[i, j]
                ks[i, j] = kap[i, j] + half * ak[i, j]
        status, md2, ms = _stage_adaptive(xs, vs, ks, kappa_g, eps, d2,
                                          norms, counts, av, ak, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2), run_min_sim, kmin, kmax
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] += 2.0 * vs[i, k]
                acc_v[i, k] += 2.0 * av[i, k]
                xs[i, k] = x[i, k] + dt * vs[i, k]
                vs[i, k] = v[i, k] + dt * av[i, k]
            for j in range(n):
                acc_k[i, j] += 2.0 * ak[i, j]
                ks[i, j] = kap[i, j] + dt * ak[i, j]
        status, md2, ms = _stage_adaptive(xs, vs, ks, kappa_g, eps, d2,
                                          norms, counts, av, ak, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2), run_min_sim, kmin, kmax
        for i in range(n):
            for k in range(dim):
                x[i, k] += sixth * (acc_x[i, k] + vs[i, k])
                v[i, k] += sixth * (acc_v[i, k] + av[i, k])
            for j in range(n):
                kij = kap[i, j] + sixth * (acc_k[i, j] + ak[i, j])
                kap[i, j] = kij
                if kij < kmin:
                    kmin = kij
                if kij > kmax:
                    kmax = kij
        if slot < len(sample_steps) and sample_steps[slot] == step + 1:
            out_x[slot] = x
            out_v[slot] = v
            if record_kappa:
                out_k[slot] = kap
            slot += 1
    status, md2, ms = _stage_adaptive(x, v, kap, kappa_g, eps, d2,
                                      norms, counts, av, ak, True)
    if status == 0:
        if md2 > run_max_d2:
            run_max_d2 = md2
        if ms < run_min_sim:
            run_min_sim = ms
    return 0, n_steps, math.sqrt(run_max_d2), run_min_sim, kmin, kmax


@njit(cache=True)
def rk4_classical(x, v, d, dt, n_steps, sample_steps, out_x, out_v):
    """Integrate the distance-kernel model; sample into out_*."""
    n, dim = x.shape
    d2 = d * d
    counts = np.empty(n, dtype=np.int64)
    xs = np.empty((n, dim))
    vs = np.empty((n, dim))
    av = np.empty((n, dim))
    acc_x = np.empty((n, dim))
    acc_v = np.empty((n, dim))
    run_max_d2 = 0.0
    slot = 0
    if sample_steps[slot] == 0:
        out_x[slot] = x
        out_v[slot] = v
        slot += 1
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(n_steps):
        status, md2 = _stage_classical(x, v, d2, counts, av, True)
        if status != 0:
            return status, step, math.sqrt(run_max_d2)
        if md2 > run_max_d2:
            run_max_d2 = md2
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] = v[i, k]
                acc_v[i, k] = av[i, k]
                xs[i, k] = x[i, k] + half * v[i, k]
                vs[i, k] = v[i, k] + half * av[i, k]
        status, md2 = _stage_classical(xs, vs, d2, counts, av, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2)
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] += 2.0 * vs[i, k]
                acc_v[i, k] += 2.0 * av[i, k]
                xs[i, k] = x[i, k] + half * vs[i, k]
                vs[i, k] = v[i, k] + half * av[i, k]
        status, md2 = _stage_classical(xs, vs, d2, counts, av, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2)
        for i in range(n):
            for k in range(dim):
                acc_x[i, k] += 2.0 * vs[i, k]
                acc_v[i, k] += 2.0 * av[i, k]
                xs[i, k] = x[i, k] + dt * vs[i, k]
                vs[i, k] = v[i, k] + dt * av[i, k]
        status, md2 = _stage_classical(xs, vs, d2, counts, av, False)
        if status != 0:
            return status, step, math.sqrt(run_max_d2)
        for i in range(n):
            for k in range(dim):
                x[i, k] += sixth * (acc_x[i, k] + vs[i, k])
                v[i, k] += sixth * (acc_v[i, k] + av[i, k])
        if slot < len(sample_steps) and sample_steps[slot] == step + 1:
            out_x[slot] = x
            out_v[slot] = v
            slot += 1
    status, md2 = _stage_classical(x, v, d2, counts, av, True)
    if status == 0 and md2 > run_max_d2:
        run_max_d2 = md2
    return 0, n_steps, math.sqrt(run_max_d2)
