"""Spectra of real (generally nonsymmetric) Laplacians and rate utilities."""

from __future__ import annotations

import math

import numpy as np

from dqform.errors import NoConvergence, NonSquare, NotSimpleZero

SIMPLE_ZERO_TOL = 1e-8


def _sort_spectrum(ev: np.ndarray) -> np.ndarray:
    ev = np.asarray(ev, dtype=complex)
    # snap rounding noise so conjugate pairs order deterministically
    re = np.round(ev.real, 12)
    im = np.round(ev.imag, 12)
    return ev[np.lexsort((im, re))]


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues sorted ascending by real part, then imaginary part.

    LAPACK ``geev`` (balancing, Hessenberg reduction, shifted QR).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    try:
        ev = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return _sort_spectrum(ev)


def lambda2r(m, K=None) -> float:
    """Real part of the eigenvalue of ``K @ m`` with second-smallest real part.

    ``K`` is an optional positive diagonal (given as its diagonal).
    """
    m = np.asarray(m, dtype=float)
    if K is not None:
        m = np.asarray(K, dtype=float)[:, None] * m
    ev = eigenvalues(m)
    if ev.size < 2:
        raise NotSimpleZero("need at least two nodes")
    if abs(ev[0]) > SIMPLE_ZERO_TOL or ev[1].real <= SIMPLE_ZERO_TOL:
        raise NotSimpleZero(f"smallest eigenvalues {ev[0]:.3g}, {ev[1]:.3g}")
    return float(ev[1].real)


def theory_rate(lam2r: float, t: float) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    return math.exp(-lam2r * t)


def jordan_exp_bound(lam_r: float, n0: int, t: float) -> float:
    """Upper bound on ``sigma_max(exp(-J t))`` for an ``n0``-dimensional Jordan block."""
    if n0 < 1 or t < 0:
        raise ValueError("need n0 >= 1 and t >= 0")
    c = n0 - 1 + n0 * t ** (n0 - 1) / math.factorial(n0 - 1)
    return c * math.exp(-lam_r * t)
