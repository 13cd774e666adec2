"""Projected iteration of the dual quaternion Laplacian control law."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dqform.dq_algebra import (
    dq_matrix_embedding,
    dqconj,
    dqmul,
    is_unit_array,
    project_udq_array,
    random_udq_array,
)
from dqform.errors import MissingLimit, NonUnitInput, NoSpanningTree, ShapeMismatch
from dqform.graph_topology import has_simple_zero
from dqform.udqdg import Formation, Scheme, build_dq_laplacian

ERROR_FLOOR = 1e-16


@dataclass
class SimConfig:
    scheme: Scheme
    K: Optional[np.ndarray] = None
    alpha: float = 0.2
    delta: Optional[float] = None
    k_max: int = 350
    rng_seed: Optional[int] = 0
    record_every: int = 1
    use_stop: bool = True
    # reference formation for the limit; taken from the scheme when omitted
    formation: Optional[Formation] = None
    initial: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.scheme.graph.n
        if self.K is None:
            self.K = np.ones(n)
        self.K = np.asarray(self.K, dtype=float).reshape(-1)
        if self.delta is None:
            self.delta = 1e-15 * math.sqrt(n)
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.K.shape != (n,) or np.any(self.K <= 0):
            raise ValueError("K must be a positive diagonal of length n")
        if self.record_every < 1 or self.k_max < 0:
            raise ValueError("record_every >= 1 and k_max >= 0 required")


@dataclass
class Trajectory:
    steps: np.ndarray
    times: np.ndarray
    states: np.ndarray
    stopped_at: int
    converged: bool
    limit: Optional[np.ndarray] = None
    errors: Optional[np.ndarray] = None
    transform: Optional[np.ndarray] = None

    @property
    def cap_reached(self) -> bool:
        return not self.converged

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def step(z, L_hat, K, alpha: float) -> np.ndarray:
    """One projected update ``proj(z - alpha K L_hat z)``.

    ``L_hat`` may be the ``(n, n, 2, 4)`` dual-quaternion Laplacian or its
    precomputed ``(8n, 8n)`` real embedding.
    """
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    L_hat = np.asarray(L_hat, dtype=float)
    if L_hat.ndim == 4:
        if L_hat.shape[:2] != (n, n):
            raise ShapeMismatch(f"Laplacian {L_hat.shape[:2]} vs state of {n}")
        E = dq_matrix_embedding(L_hat)
    elif L_hat.shape == (8 * n, 8 * n):
        E = L_hat
    else:
        raise ShapeMismatch(f"Laplacian {L_hat.shape} vs state of {n}")
    K = np.ones(n) if K is None else np.asarray(K, dtype=float).reshape(-1)
    if K.shape != (n,):
        raise ShapeMismatch("K must have one entry per agent")
    Lz = (E @ z.reshape(-1)).reshape(n, 2, 4)
    return project_udq_array(z - alpha * K[:, None, None] * Lz)


def limit_transform(z_final, q_d1) -> np.ndarray:
    """``c = (q_d1*)^-1 z_1 = q_d1 z_1``; the limit is ``conj(q_d) c``."""
    z1 = np.asarray(z_final, dtype=float).reshape(-1, 2, 4)[0]
    q_d1 = np.asarray(q_d1, dtype=float).reshape(2, 4)
    if not (is_unit_array(z1) and is_unit_array(q_d1)):
        raise NonUnitInput("limit_transform needs unit inputs")
    return dqmul(q_d1, z1)


def limit_configuration(f: Formation, c) -> np.ndarray:
    return dqmul(f.conj(), np.asarray(c, dtype=float)[None])


def error_curve(traj: Trajectory) -> np.ndarray:
    """``(t, err)`` rows, ``err = ||z_inf - z(t)||_2R``; values below 1e-16 read as 0."""
    if traj.limit is None:
        raise MissingLimit("trajectory has no limit configuration")
    diff = (traj.limit[None] - traj.states).reshape(len(traj.states), -1)
    err = np.linalg.norm(diff, axis=1)
    err[err < ERROR_FLOOR] = 0.0
    return np.column_stack([traj.times, err])


def formation_from_scheme(s: Scheme) -> Optional[Formation]:
    """Formation consistent with ``s`` (gauge ``x_1 = 1``), or ``None`` if the
    scheme is not reasonable to 1e-9.
    """
    from dqform.feasibility import nearest_feasible

    res = nearest_feasible(build_dq_laplacian(s))
    if res.residual > 1e-9:
        return None
    return Formation(dqconj(res.configuration))


def simulate(cfg: SimConfig) -> Trajectory:
    s = cfg.scheme
    g = s.graph
    n = g.n
    if not has_simple_zero(g):
        raise NoSpanningTree("graph has no sensing sink reachable from every agent")
    E = dq_matrix_embedding(build_dq_laplacian(s))

    if cfg.initial is not None:
        z = np.array(cfg.initial, dtype=float).reshape(n, 2, 4)
        if not is_unit_array(z):
            raise NonUnitInput("initial state must be unit entrywise")
    else:
        z = random_udq_array(np.random.default_rng(cfg.rng_seed), n)

    steps, states = [0], [z.copy()]
    k = 0
    converged = False
    while k < cfg.k_max:
        z_next = step(z, E, cfg.K, cfg.alpha)
        k += 1
        diff = float(np.linalg.norm((z_next - z).reshape(-1)))
        z = z_next
        if k % cfg.record_every == 0:
            steps.append(k)
            states.append(z.copy())
        if cfg.use_stop and diff <= cfg.delta:
            converged = True
            break
    if steps[-1] != k:
        steps.append(k)
        states.append(z.copy())

    states_arr = np.stack(states)
    steps_arr = np.array(steps)
    traj = Trajectory(
        steps=steps_arr,
        times=steps_arr * cfg.alpha,
        states=states_arr,
        stopped_at=k,
        converged=converged,
    )
    f = cfg.formation if cfg.formation is not None else formation_from_scheme(s)
    if f is not None:
        c = limit_transform(z, f.poses[0])
        traj.transform = c
        traj.limit = limit_configuration(f, c)
        traj.errors = error_curve(traj)[:, 1]
    return traj


def fit_log_slope(times, errors, lo: float = 1e-10, hi: float = 1e-2):
    """Least-squares slope of ``log err`` against ``t`` over ``lo <= err <= hi``.

    Only the first contiguous run inside the window counts; returns ``nan``
    when fewer than three samples fall in it.
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    inside = (errors >= lo) & (errors <= hi)
    idx = np.flatnonzero(inside)
    if idx.size < 3:
        return float("nan")
    start = idx[0]
    end = start
    while end + 1 < len(errors) and inside[end + 1]:
        end += 1
    sel = slice(start, end + 1)
    if end - start + 1 < 3:
        return float("nan")
    slope, _ = np.polyfit(times[sel], np.log(errors[sel]), 1)
    return float(slope)
