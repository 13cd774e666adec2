import math

import numpy as np
import pytest

from dqform.errors import NonSquare, NotSimpleZero
from dqform.graph_topology import gen_cycle, gen_grid, gen_star, underlying_laplacian
from dqform.spectral import eigenvalues, jordan_exp_bound, lambda2r, theory_rate


def circulant_directed(n):
    return np.array([1 - np.exp(2j * np.pi * k / n) for k in range(n)])


def sorted_c(v):
    v = np.asarray(v, dtype=complex)
    return v[np.lexsort((np.round(v.imag, 9), np.round(v.real, 9)))]


@pytest.mark.parametrize("n", [5, 7, 9, 12])
def test_directed_cycle_spectrum(n):
    ev = eigenvalues(underlying_laplacian(gen_cycle(n)))
    np.testing.assert_allclose(ev, sorted_c(circulant_directed(n)), atol=1e-9)


@pytest.mark.parametrize("n", [5, 7, 9])
def test_undirected_cycle_spectrum(n):
    ev = eigenvalues(underlying_laplacian(gen_cycle(n, directed=False)))
    expected = np.sort([2 - 2 * math.cos(2 * math.pi * k / n) for k in range(n)])
    np.testing.assert_allclose(ev.real, expected, atol=1e-9)
    np.testing.assert_allclose(ev.imag, 0, atol=1e-9)


def test_triangular_grid_spectrum_is_diagonal():
    g = gen_grid(4)
    ev = eigenvalues(underlying_laplacian(g))
    np.testing.assert_allclose(ev.real, np.sort(g.out_degrees()), atol=1e-6)


def test_spectrum_sorted_and_permutation_invariant(rng):
    L = underlying_laplacian(gen_star(6))
    ev = eigenvalues(L)
    assert np.all(np.diff(np.round(ev.real, 12)) >= 0)
    perm = rng.permutation(L.shape[0])
    np.testing.assert_allclose(eigenvalues(L[np.ix_(perm, perm)]), ev, atol=1e-9)


def test_trace_and_zero_eigenvalue():
    for g in (gen_cycle(9), gen_star(8, False), gen_grid(5), gen_grid(5, False)):
        L = underlying_laplacian(g)
        ev = eigenvalues(L)
        assert abs(ev.sum() - np.trace(L)) < 1e-8 * L.shape[0]
        assert np.min(np.abs(ev)) < 1e-9


def test_non_square():
    with pytest.raises(NonSquare):
        eigenvalues(np.zeros((2, 3)))


def test_lambda2r_examples():
    assert lambda2r(underlying_laplacian(gen_cycle(5))) == pytest.approx(1 - math.cos(2 * math.pi / 5), abs=1e-9)
    assert lambda2r(underlying_laplacian(gen_cycle(5))) == pytest.approx(0.690983, abs=1e-6)
    for n0 in (3, 4, 7):
        assert lambda2r(underlying_laplacian(gen_grid(n0))) == pytest.approx(1.0, abs=1e-8)
    lam = lambda2r(underlying_laplacian(gen_cycle(9, directed=False)))
    assert lam == pytest.approx(0.467911, abs=1e-6)
    assert float(f"{theory_rate(lam, 30):.2e}") == 8.01e-07


def test_lambda2r_with_precondition():
    L = underlying_laplacian(gen_cycle(5))
    K = np.array([1.0, 2.0, 0.5, 1.5, 3.0])
    expected = np.sort(np.linalg.eigvals(np.diag(K) @ L).real)[1]
    assert lambda2r(L, K) == pytest.approx(expected, abs=1e-9)


def test_lambda2r_rejects_multiple_zero():
    L = np.zeros((3, 3))
    with pytest.raises(NotSimpleZero):
        lambda2r(L)


def test_theory_rate_examples():
    assert float(f"{theory_rate(0.690983, 30):.2e}") == 9.94e-10
    assert theory_rate(0.7, 0) == 1.0
    lam7 = 1 - math.cos(2 * math.pi / 7)
    assert float(f"{theory_rate(lam7, 50):.2e}") == 6.67e-09


def test_jordan_bound_examples():
    assert jordan_exp_bound(0.3, 1, 2.0) == pytest.approx(math.exp(-0.6))
    assert jordan_exp_bound(0.3, 3, 0.0) == 2.0


def sigma_max_power(A, iters=300, tol=1e-13):
    x = np.ones(A.shape[1]) / math.sqrt(A.shape[1])
    est = 0.0
    for _ in range(iters):
        y = A.T @ (A @ x)
        new = np.linalg.norm(y)
        x = y / new
        if abs(new - est) <= tol * new:
            break
        est = new
    return math.sqrt(new)


def jordan_exp_series(lam_r, lam_i, n0, t):
    """exp(-J t) from the terminating nilpotent series."""
    N = np.diag(np.ones(n0 - 1), 1)
    E = np.zeros((n0, n0))
    term = np.eye(n0)
    for k in range(n0):
        E += term
        term = term @ (-N * t) / (k + 1)
    return np.exp(-(lam_r + 1j * lam_i) * t) * E


def test_jordan_bound_dominates_on_grid():
    rng = np.random.default_rng(11)
    lams = rng.uniform(0.01, 3, size=50)
    ims = rng.uniform(-2, 2, size=50)
    for lam, im in zip(lams, ims):
        for n0 in range(1, 7):
            for t in np.arange(0, 10.5, 0.5):
                M = jordan_exp_series(lam, im, n0, t)
                # strip the unimodular phase e^{-i im t}; the rest is real
                R = (M * np.exp(1j * im * t)).real
                smax = sigma_max_power(R)
                assert smax == pytest.approx(np.linalg.norm(R, 2), rel=1e-6, abs=1e-300)
                assert smax <= jordan_exp_bound(lam, n0, t) * (1 + 1e-9) + 1e-12
