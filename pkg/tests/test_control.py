import math

import numpy as np
import pytest

from dqform.control import (
    SimConfig,
    Trajectory,
    error_curve,
    fit_log_slope,
    limit_configuration,
    limit_transform,
    simulate,
    step,
)
from dqform.dq_algebra import (
    dq_identity_array,
    dq_matvec,
    dqmul,
    is_unit_array,
    norm_2R,
    random_udq_array,
)
from dqform.errors import MissingLimit, NonUnitInput, NoSpanningTree, ShapeMismatch
from dqform.graph_topology import DiGraph, gen_cycle, make_topology, underlying_laplacian
from dqform.spectral import eigenvalues, lambda2r
from dqform.udqdg import Formation, Scheme, build_dq_laplacian, desired_formation, relative_scheme


def setup(kind="cycle", n=5, directed=True):
    g = make_topology(kind, n, directed)
    f = desired_formation(kind, n)
    return g, f, relative_scheme(f, g)


def discrete_rate(L, alpha, K=None):
    """Asymptotic log-decay per unit time of the linear Euler recursion."""
    M = L if K is None else np.diag(K) @ L
    ev = eigenvalues(M)[1:]
    return math.log(np.max(np.abs(1 - alpha * ev))) / alpha


def test_step_zero_alpha_is_identity(rng):
    _, _, s = setup()
    z = random_udq_array(rng, 5)
    np.testing.assert_allclose(step(z, build_dq_laplacian(s), None, 0.0), z, atol=1e-14)


def test_step_fixes_limit_set(rng):
    _, f, s = setup("star", 10)
    L = build_dq_laplacian(s)
    for c in random_udq_array(rng, 20):
        z = dqmul(f.conj(), c[None])
        np.testing.assert_allclose(step(z, L, None, 0.2), z, atol=1e-12)


def test_step_matches_real_consensus_on_translation_embedding(rng):
    g = gen_cycle(6)
    s = Scheme(g, dq_identity_array((len(g.arcs),)))
    L = underlying_laplacian(g)
    K = rng.uniform(0.5, 2.0, 6)
    alpha = 0.15
    x = rng.standard_normal((6, 3))
    z = dq_identity_array((6,))
    z[:, 1, 1:] = x
    Lhat = build_dq_laplacian(s)
    for _ in range(40):
        z = step(z, Lhat, K, alpha)
        x = x - alpha * (K[:, None] * (L @ x))
        np.testing.assert_allclose(z[:, 0], np.tile([1.0, 0, 0, 0], (6, 1)), atol=1e-15)
        np.testing.assert_allclose(z[:, 1, 0], 0, atol=1e-15)
        np.testing.assert_allclose(z[:, 1, 1:], x, atol=1e-13)


def test_step_shape_mismatch(rng):
    _, _, s = setup()
    with pytest.raises(ShapeMismatch):
        step(random_udq_array(rng, 4), build_dq_laplacian(s), None, 0.2)


def test_dcycle_converges_below_1e12_at_t70():
    _, f, s = setup()
    tr = simulate(SimConfig(s, k_max=350, use_stop=False, rng_seed=1, formation=f))
    assert tr.times[-1] == pytest.approx(70.0)
    idx = int(np.argmin(np.abs(tr.times - 69.8)))
    assert tr.errors[idx] < 1e-12
    assert tr.cap_reached


def test_start_at_fixed_point_stops_after_one_step(rng):
    g = make_topology("grid", 9, True)
    q = random_udq_array(rng, 1)
    # exact for the identity pose, rounding of the limit product otherwise
    for pose, tol in ((dq_identity_array((1,)), 0.0), (q, 1e-14)):
        f = Formation(np.repeat(pose, 9, axis=0))
        tr = simulate(SimConfig(relative_scheme(f, g), initial=f.poses, formation=f))
        assert tr.stopped_at == 1 and tr.converged
        assert np.all(tr.errors <= tol)
    _, f, s = setup("grid", 9)
    tr = simulate(SimConfig(s, initial=f.conj(), formation=f))
    assert tr.stopped_at == 1 and tr.errors[-1] <= 1e-14


def test_stopping_rule_triggers():
    _, f, s = setup()
    tr = simulate(SimConfig(s, k_max=5000, rng_seed=3, formation=f))
    assert tr.converged and tr.stopped_at < 5000
    diff = norm_2R(tr.states[-1] - tr.states[-2])
    assert diff <= 1e-15 * math.sqrt(5)


def test_iterates_stay_unit():
    _, f, s = setup("star", 16)
    tr = simulate(SimConfig(s, k_max=200, use_stop=False, rng_seed=2, formation=f))
    for z in tr.states:
        assert is_unit_array(z)


def test_log_slope_tracks_spectrum():
    for kind, n in [("cycle", 5), ("star", 10)]:
        g, f, s = setup(kind, n)
        L = underlying_laplacian(g)
        tr = simulate(SimConfig(s, k_max=500, use_stop=False, rng_seed=4, formation=f))
        slope = fit_log_slope(tr.times, tr.errors)
        lam = lambda2r(L)
        assert abs(-slope - lam) <= 0.10 * lam
        # the projected Euler recursion decays at the linear discrete rate
        assert slope == pytest.approx(discrete_rate(L, 0.2), rel=0.01)


def test_precondition_rate_follows_KL_spectrum():
    g, f, s = setup("cycle", 5)
    K = np.array([1.0, 1.5, 0.8, 1.2, 2.0])
    tr = simulate(SimConfig(s, K=K, k_max=600, use_stop=False, rng_seed=5, formation=f))
    slope = fit_log_slope(tr.times, tr.errors)
    assert slope == pytest.approx(discrete_rate(underlying_laplacian(g), 0.2, K), rel=0.02)


def test_error_curve_eventually_monotone():
    _, f, s = setup()
    tr = simulate(SimConfig(s, k_max=350, use_stop=False, rng_seed=6, formation=f))
    e = tr.errors
    window = np.flatnonzero((e > 1e-10) & (e < 1e-2))
    assert np.all(np.diff(e[window[0]:window[-1] + 1]) < 0)


def test_halving_alpha_first_order_consistent():
    _, f, s = setup()
    z0 = random_udq_array(np.random.default_rng(3), 5)
    runs = {}
    for a, kmax in [(0.2, 20), (0.1, 40), (0.05, 80)]:
        runs[a] = simulate(SimConfig(s, alpha=a, k_max=kmax, use_stop=False, initial=z0, formation=f))
    for t in np.arange(0.2, 2.01, 0.2):
        e1 = runs[0.2].errors[round(t / 0.2)]
        e2 = runs[0.1].errors[round(t / 0.1)]
        assert abs(e1 - e2) / e2 < 0.05
    # states converge at first order in the step size
    quarter = simulate(SimConfig(s, alpha=0.025, k_max=160, use_stop=False, initial=z0, formation=f))
    states = [runs[0.2].states[10], runs[0.1].states[20], runs[0.05].states[40], quarter.states[80]]
    d = [norm_2R(states[i] - states[i + 1]) for i in range(3)]
    for a, b in zip(d, d[1:]):
        assert 1.7 < a / b < 2.6


def test_limit_transform_examples(rng):
    z = random_udq_array(rng, 4)
    np.testing.assert_allclose(limit_transform(z, dq_identity_array()), z[0], atol=0)
    f = Formation(random_udq_array(rng, 4))
    p = random_udq_array(rng, 1)[0]
    z = dqmul(f.conj(), p[None])
    np.testing.assert_allclose(limit_transform(z, f.poses[0]), p, atol=1e-14)
    with pytest.raises(NonUnitInput):
        limit_transform(2 * z, f.poses[0])


def test_limit_in_nullspace():
    _, f, s = setup("grid", 9)
    tr = simulate(SimConfig(s, k_max=100, use_stop=False, rng_seed=8, formation=f))
    assert norm_2R(dq_matvec(build_dq_laplacian(s), tr.limit)) < 1e-10
    np.testing.assert_allclose(limit_configuration(f, tr.transform), tr.limit, atol=0)


def test_error_curve_requires_limit():
    tr = Trajectory(np.array([0]), np.array([0.0]), dq_identity_array((1, 1)), 0, True)
    with pytest.raises(MissingLimit):
        error_curve(tr)
    tr.limit = tr.states[0]
    np.testing.assert_array_equal(error_curve(tr), [[0.0, 0.0]])


def test_single_agent_error_is_zero(rng):
    g = DiGraph(1, ())
    s = Scheme(g, np.zeros((0, 2, 4)))
    f = Formation(random_udq_array(rng, 1))
    tr = simulate(SimConfig(s, k_max=5, use_stop=False, formation=f))
    assert np.all(tr.errors <= 1e-15)


def test_formation_inferred_from_scheme():
    _, f, s = setup("star", 10)
    a = simulate(SimConfig(s, k_max=300, use_stop=False, rng_seed=2))
    b = simulate(SimConfig(s, k_max=300, use_stop=False, rng_seed=2, formation=f))
    np.testing.assert_allclose(a.limit, b.limit, atol=1e-12)


def test_no_spanning_tree():
    g = DiGraph(6, ((1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4)))
    s = Scheme(g, dq_identity_array((6,)))
    with pytest.raises(NoSpanningTree):
        simulate(SimConfig(s))


def test_record_every_and_determinism():
    _, f, s = setup()
    a = simulate(SimConfig(s, k_max=101, record_every=10, use_stop=False, rng_seed=9, formation=f))
    assert list(a.steps) == list(range(0, 101, 10)) + [101]
    b = simulate(SimConfig(s, k_max=101, record_every=10, use_stop=False, rng_seed=9, formation=f))
    np.testing.assert_array_equal(a.states, b.states)


def test_config_validation():
    _, _, s = setup()
    with pytest.raises(ValueError):
        SimConfig(s, alpha=0.0)
    with pytest.raises(ValueError):
        SimConfig(s, K=np.array([1, 1, 1, 1, -1.0]))
    assert SimConfig(s).delta == pytest.approx(1e-15 * math.sqrt(5))
