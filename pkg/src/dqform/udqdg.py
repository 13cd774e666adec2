"""Unit-dual-quaternion weighted digraphs: formations, schemes, Laplacians."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from dqform.dq_algebra import (
    dq_identity_array,
    dq_matvec,
    dqconj,
    dqmul,
    is_unit_array,
    make_pose_array,
    norm_2R,
    qmul,
)
from dqform.errors import DqFormError, NegativeSigma, NonUnitInput, SizeMismatch
from dqform.graph_topology import DiGraph, topology_size_param


@dataclass(frozen=True, eq=False)
class Formation:
    """Desired absolute poses, one unit dual quaternion per agent, ``(n, 2, 4)``."""

    poses: np.ndarray

    def __post_init__(self):
        poses = np.array(self.poses, dtype=float).reshape(-1, 2, 4)
        poses.setflags(write=False)
        object.__setattr__(self, "poses", poses)
        if not is_unit_array(poses):
            raise NonUnitInput("formation entries must be unit dual quaternions")

    @property
    def n(self) -> int:
        return self.poses.shape[0]

    def conj(self) -> np.ndarray:
        return dqconj(self.poses)


@dataclass(frozen=True, eq=False)
class Scheme:
    """A digraph with one unit dual quaternion weight per arc.

    ``weights[k]`` belongs to ``graph.arcs[k]``.
    """

    graph: DiGraph
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1, 2, 4)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if w.shape[0] != len(self.graph.arcs):
            raise SizeMismatch(f"{w.shape[0]} weights for {len(self.graph.arcs)} arcs")
        if not is_unit_array(w):
            raise NonUnitInput("scheme weights must be unit dual quaternions")

    def weight(self, tail: int, head: int) -> np.ndarray:
        return self.weights[self.graph.arcs.index((tail, head))]

    def as_dict(self) -> Dict[Tuple[int, int], np.ndarray]:
        return {arc: self.weights[k] for k, arc in enumerate(self.graph.arcs)}


def _positions(kind: str, n: int) -> np.ndarray:
    p = topology_size_param(kind, n)
    pos = np.zeros((n, 3))
    if kind == "cycle":
        ang = 2 * np.pi * np.arange(n) / n
        pos[:, 0] = 2 * np.cos(ang)
        pos[:, 1] = 2 * np.sin(ang)
    elif kind == "star":
        ang = 2 * np.pi * np.arange(p) / p
        pos[:p, 0] = np.cos(ang)
        pos[:p, 1] = np.sin(ang)
        mid = ang + np.pi / p
        pos[p:, 0] = 2 * np.cos(mid)
        pos[p:, 1] = 2 * np.sin(mid)
    elif kind == "grid":
        idx = np.arange(n)
        pos[:, 0] = idx % p
        pos[:, 1] = idx // p
    return pos


def desired_formation(kind: str, n: int) -> Formation:
    """Attitudes rotate by ``theta_i = 2 pi (i-1)/n`` about ``(cos, sin, 0)``;
    positions follow a planar layout of the topology."""
    try:
        pos = _positions(kind, n)
    except DqFormError as exc:
        raise SizeMismatch(str(exc)) from exc
    theta = 2 * np.pi * np.arange(n) / n
    half = theta / 2
    att = np.stack(
        [np.cos(half), np.sin(half) * np.cos(theta), np.sin(half) * np.sin(theta), np.zeros(n)],
        axis=-1,
    )
    return Formation(make_pose_array(att, pos))


def relative_scheme(f: Formation, g: DiGraph) -> Scheme:
    """Weights ``q_di* q_dj`` on each arc ``(i, j)``."""
    if f.n != g.n:
        raise SizeMismatch(f"formation has {f.n} poses, graph has {g.n} nodes")
    if not g.arcs:
        return Scheme(g, np.zeros((0, 2, 4)))
    tails = np.array([t for t, _ in g.arcs]) - 1
    heads = np.array([h for _, h in g.arcs]) - 1
    return Scheme(g, dqmul(dqconj(f.poses[tails]), f.poses[heads]))


def build_dq_laplacian(s: Scheme) -> np.ndarray:
    """``L = D - A`` as a ``(n, n, 2, 4)`` array."""
    g = s.graph
    L = np.zeros((g.n, g.n, 2, 4))
    deg = g.out_degrees()
    for i in range(g.n):
        L[i, i, 0, 0] = deg[i]
    for k, (tail, head) in enumerate(g.arcs):
        L[tail - 1, head - 1] -= s.weights[k]
    return L


def embed_real_matrix(m) -> np.ndarray:
    """Real ``(n, n)`` matrix as a dual-quaternion matrix."""
    m = np.asarray(m, dtype=float)
    out = np.zeros(m.shape + (2, 4))
    out[..., 0, 0] = m
    return out


def factorization_gap(L_hat, f: Formation) -> float:
    """Largest entrywise deviation between ``L_hat`` and ``Q* L Q`` with ``Q = diag(f)``."""
    L_hat = np.asarray(L_hat, dtype=float)
    n = L_hat.shape[0]
    if n == 0:
        return 0.0
    # recover the real Laplacian from the sparsity pattern of L_hat
    L = np.zeros((n, n))
    std = L_hat[..., 0, :]
    nz = np.linalg.norm(L_hat.reshape(n, n, 8), axis=-1) > 0
    L[nz] = -1.0
    np.fill_diagonal(L, std[np.arange(n), np.arange(n), 0])
    q = f.poses
    QLQ = dqmul(dqmul(dqconj(q)[:, None], embed_real_matrix(L)), q[None, :])
    return float(np.max(np.abs(QLQ - L_hat)))


def verify_reasonable(L_hat, f: Formation, tol: float = 1e-10) -> float:
    """Residual ``||L_hat conj(f)||_2R``; small iff the scheme matches ``f``.

    Also checks the factorization ``L_hat = Q* L Q`` when the residual is small.
    """
    L_hat = np.asarray(L_hat, dtype=float)
    if L_hat.shape[:2] != (f.n, f.n):
        raise SizeMismatch(f"Laplacian {L_hat.shape[:2]} vs formation of {f.n}")
    if f.n == 0:
        return 0.0
    residual = norm_2R(dq_matvec(L_hat, f.conj()))
    if residual <= tol * max(1, f.n):
        gap = factorization_gap(L_hat, f)
        if gap > tol:
            raise AssertionError(f"factorization gap {gap:.3g} for a reasonable scheme")
    return residual


def noise_udq_array(rng: np.random.Generator, sigma: float, size: int) -> np.ndarray:
    """Multiplicative noise factors close to the identity.

    Standard part from three angles uniform on ``[0, sigma*pi]`` through the
    spherical parametrization, dual part ``1/2 t p_s`` with
    ``t ~ N(0, sigma^2 I_3)``.
    """
    th = rng.uniform(0.0, sigma * np.pi, size=(size, 3))
    t = rng.normal(0.0, sigma, size=(size, 3))
    s1, c1 = np.sin(th[:, 0]), np.cos(th[:, 0])
    s2, c2 = np.sin(th[:, 1]), np.cos(th[:, 1])
    s3, c3 = np.sin(th[:, 2]), np.cos(th[:, 2])
    ps = np.stack([c1, s1 * c2, s1 * s2 * c3, s1 * s2 * s3], axis=-1)
    tq = np.concatenate([np.zeros((size, 1)), t], axis=-1)
    pd = 0.5 * qmul(tq, ps)
    return np.stack([ps, pd], axis=-2)


def perturb_scheme(s: Scheme, sigma: float, rng_seed=None) -> Scheme:
    """Right-multiply every weight by an independent noise factor."""
    if sigma < 0:
        raise NegativeSigma(f"sigma must be >= 0, got {sigma}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    m = len(s.graph.arcs)
    if sigma == 0:
        noise = dq_identity_array((m,))
    else:
        noise = noise_udq_array(rng, sigma, m)
    return Scheme(s.graph, dqmul(s.weights, noise))


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_formation(f) -> str:
    poses = f.poses if isinstance(f, Formation) else np.asarray(f).reshape(-1, 2, 4)
    return "".join(" ".join(_fmt(v) for v in p.reshape(-1)) + "\n" for p in poses)


def read_formation(text: str) -> Formation:
    rows = [
        [float(v) for v in ln.split()]
        for ln in text.splitlines()
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if any(len(r) != 8 for r in rows):
        raise DqFormError("formation lines need 8 floats")
    return Formation(np.array(rows).reshape(-1, 2, 4))


def write_scheme(s: Scheme) -> str:
    lines = [f"n {s.graph.n}"]
    for (t, h), w in zip(s.graph.arcs, s.weights):
        lines.append(f"{t} {h} " + " ".join(_fmt(v) for v in w.reshape(-1)))
    return "\n".join(lines) + "\n"


def read_scheme(text: str) -> Scheme:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or rows[0][0] != "n":
        raise DqFormError("scheme file must start with 'n <count>'")
    n = int(rows[0][1])
    arcs, weights = [], []
    for r in rows[1:]:
        if len(r) != 10:
            raise DqFormError("scheme lines need 'tail head' and 8 floats")
        arcs.append((int(r[0]), int(r[1])))
        weights.append([float(v) for v in r[2:]])
    return Scheme(DiGraph(n, tuple(arcs)), np.array(weights).reshape(-1, 2, 4))
