"""Nearest feasible configuration for a (possibly noisy) relative scheme.

Solves ``min ||L x||`` over dual quaternion vectors with the gauge
``x_1 = 1`` fixed, standard part first and dual part second, then projects
each entry onto the unit dual quaternions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from dqform.dq_algebra import dq_matvec, dqconj, norm_2R, project_udq_array, qmul, quat_left_matrix
from dqform.errors import RankDeficient, ShapeMismatch
from dqform.udqdg import Formation, Scheme, relative_scheme, write_formation

RANK_RTOL = 1e-10


def quat_matrix_embedding(A) -> np.ndarray:
    """``(m, k, 4)`` quaternion matrix -> ``(4m, 4k)`` real left-multiplication blocks."""
    A = np.asarray(A, dtype=float)
    m, k = A.shape[:2]
    out = np.zeros((4 * m, 4 * k))
    for i in range(m):
        for j in range(k):
            out[4 * i:4 * i + 4, 4 * j:4 * j + 4] = quat_left_matrix(A[i, j])
    return out


def quat_lstsq(A, b) -> np.ndarray:
    """Minimise ``||A x + b||`` over quaternion vectors ``x``.

    ``A`` has shape ``(m, k, 4)``, ``b`` shape ``(m, 4)``; returns ``(k, 4)``.
    Uses a Householder QR of the real embedding.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 3 or b.shape != (A.shape[0], 4):
        raise ShapeMismatch(f"A {A.shape} and b {b.shape} do not match")
    k = A.shape[1]
    if k == 0:
        return np.zeros((0, 4))
    E = quat_matrix_embedding(A)
    if E.shape[0] < E.shape[1]:
        raise RankDeficient("fewer equations than unknowns")
    Q, R = np.linalg.qr(E, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.min() <= RANK_RTOL * max(diag.max(), 1.0):
        raise RankDeficient(f"embedded matrix is rank deficient (min |R_ii| = {diag.min():.3g})")
    x = solve_triangular(R, -(Q.T @ b.reshape(-1)))
    return x.reshape(k, 4)


@dataclass
class RepairResult:
    configuration: np.ndarray  # projected x, shape (n, 2, 4)
    residual: float
    residual_after: float
    raw: np.ndarray  # x before projection

    def formation(self) -> Formation:
        """Formation whose conjugate is the recovered configuration."""
        return Formation(dqconj(self.configuration))

    def repaired_scheme(self, graph) -> Scheme:
        return relative_scheme(self.formation(), graph)


def nearest_feasible(L_hat) -> RepairResult:
    L_hat = np.asarray(L_hat, dtype=float)
    n = L_hat.shape[0]
    if L_hat.shape != (n, n, 2, 4):
        raise ShapeMismatch(f"expected an (n, n, 2, 4) Laplacian, got {L_hat.shape}")
    Ls = L_hat[..., 0, :]
    Ld = L_hat[..., 1, :]

    xs = np.zeros((n, 4))
    xs[0, 0] = 1.0
    xd = np.zeros((n, 4))
    if n > 1:
        L2s = Ls[:, 1:]
        xs[1:] = quat_lstsq(L2s, Ls[:, 0])
        # L_d x_s with the full, gauge-fixed standard vector
        Ld_xs = qmul(Ld, xs[None, :, :]).sum(axis=1)
        xd[1:] = quat_lstsq(L2s, Ld_xs)

    x = np.stack([xs, xd], axis=1)
    residual = norm_2R(dq_matvec(L_hat, x))
    config = project_udq_array(x)
    residual_after = norm_2R(dq_matvec(L_hat, config))
    return RepairResult(config, residual, residual_after, x)


def write_repair(res: RepairResult) -> str:
    head = f"residual {res.residual:.17g} residual_after {res.residual_after:.17g}\n"
    return head + write_formation(res.configuration)
