"""Property-based checks of the structural invariants."""

import json

import numpy as np
from scipy.integrate import trapezoid
from hypothesis import given, settings, assume, strategies as st
from hypothesis.extra.numpy import arrays

from netgames import ConstraintSet, LinearQuadraticGame, MultiActivityGame, make_network, spectral_measures
from netgames.config import game_from_config, game_to_config
from netgames.diagnostics import (alpha_margins, build_upsilon, check_p_upsilon, check_potential,
                                  check_strong_monotonicity, is_p_matrix)
from netgames.network import Network
from netgames.sensitivity import equilibrium_sensitivity, check_regularity, kkt_multipliers
from netgames.solvers import DynamicsConfig, brute_force_nash, discrete_br, run_dynamics, verify_equilibrium

from conftest import fd_jacobian, flat_direction_lq, races

SETTINGS = settings(max_examples=60, deadline=None)
weights = st.floats(0.0, 2.0, allow_nan=False)


@st.composite
def networks(draw, symmetric=False, min_n=1, max_n=7):
    n = draw(st.integers(min_n, max_n))
    W = draw(arrays(float, (n, n), elements=weights))
    mask = draw(arrays(bool, (n, n)))
    W = W * mask
    if symmetric:
        W = np.triu(W, 1)
        W = W + W.T
    np.fill_diagonal(W, 0.0)
    return Network(W)


@st.composite
def lq_games(draw, max_n=5, dim=1):
    net = draw(networks(min_n=2, max_n=max_n))
    N = net.n_agents
    K = draw(arrays(float, (N, dim, dim), elements=st.floats(-1, 1)))
    a = draw(arrays(float, (N, dim), elements=st.floats(-2, 2)))
    M = draw(arrays(float, (N, dim, dim), elements=st.floats(-1, 1)))
    Q = np.einsum("ijk,ilk->ijl", M, M) + 0.5 * np.eye(dim)
    upper = draw(st.floats(0.5, 3))
    if dim == 2 and draw(st.booleans()):
        B = np.vstack([-np.eye(2), np.ones((1, 2))])
        cons = ConstraintSet.polyhedron(B, np.array([0.0, 0.0, upper]))
    else:
        cons = ConstraintSet.box(np.zeros(dim), np.full(dim, upper))
    return LinearQuadraticGame(net, K=K, a=a, Q=Q, constraints=cons, n=dim)


# -- network ---------------------------------------------------------------

@SETTINGS
@given(networks(symmetric=True))
def test_symmetric_measure_ordering(net):
    sm = spectral_measures(net)
    assume(net.weights.any())
    assert sm.min_eigenvalue < 0
    assert abs(sm.min_eigenvalue) <= sm.spectral_norm + 1e-9
    assert sm.spectral_norm <= sm.infinity_norm + 1e-9
    assert abs(sm.spectral_norm - np.max(np.linalg.eigvalsh(net.weights))) < 1e-9


@SETTINGS
@given(networks())
def test_norm_transpose_and_row_sum(net):
    assert abs(spectral_measures(net).spectral_norm - spectral_measures(net.weights.T).spectral_norm) < 1e-9
    assert spectral_measures(net).infinity_norm == np.max(net.weights.sum(axis=1))


@SETTINGS
@given(st.integers(3, 9), st.integers(1, 2), st.floats(0.1, 2.0))
def test_constant_row_sum_spectral_radius(n, degree, w):
    W = make_network("directed_regular", n, degree=degree, weight=w, pattern="circulant").weights
    v = np.ones(n) + np.arange(n) * 1e-3
    for _ in range(2000):
        v = W @ v + v  # shift by the identity so the Perron root dominates strictly
        v /= np.linalg.norm(v)
    rho = (v @ (W @ v)) / (v @ v)
    assert abs(rho - degree * w) < 1e-8


@SETTINGS
@given(st.sampled_from(["complete", "undirected_ring", "bipartite_complete", "asymmetric_star", "trend_setter"]),
       st.integers(3, 8))
def test_generators_deterministic(kind, n):
    a, b = make_network(kind, n).weights, make_network(kind, n).weights
    assert a.tobytes() == b.tobytes()


# -- games -------------------------------------------------------------------

@SETTINGS
@given(lq_games(dim=2), st.integers(0, 2 ** 31))
def test_lq_jacobian_reconstruction_and_fd(game, seed):
    x = np.random.default_rng(seed).uniform(0, 1, game.dim)
    jac = game.jacobian(x)
    W = np.kron(game.G, np.eye(game.n))
    from scipy.linalg import block_diag
    np.testing.assert_array_equal(jac.gradF, block_diag(*jac.D_blocks) + block_diag(*jac.K_blocks) @ W)
    assert all(np.max(np.abs(d - d.T)) <= 1e-12 for d in jac.D_blocks)
    fd = fd_jacobian(game.F, x)
    assert np.allclose(jac.gradF, fd, rtol=1e-4, atol=1e-6)


@SETTINGS
@given(st.floats(0.05, 1.5), st.floats(1.0, 5.0), st.floats(1.0, 5.0))
def test_races_jacobian_fd(gamma, x0, x1):
    game = races(gamma)
    x = np.array([x0, x1])
    assert np.allclose(game.jacobian(x).gradF, fd_jacobian(game.F, x), rtol=1e-4, atol=1e-6)


@SETTINGS
@given(lq_games(dim=2), st.integers(0, 2 ** 31))
def test_best_response_minimum_principle(game, seed):
    rng = np.random.default_rng(seed)
    x = game.project(rng.uniform(0, 2, game.dim))
    br = game.best_response(x)
    assert game.is_feasible(br)
    z = game.aggregate(x)
    for i, cons in enumerate(game.constraints):
        y_i = br[i * 2:(i + 1) * 2]
        g = game.Q[i] @ y_i + game.K[i] @ z[i] - game.a[i]
        for y in (cons.project(v) for v in rng.uniform(-1, 4, (10, 2))):
            assert g @ (y - y_i) >= -1e-8


@SETTINGS
@given(st.floats(-0.95, 0.95), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_multi_activity_structure(beta, delta, mu):
    game = MultiActivityGame(make_network("complete", 3), 1.0, 1.0, beta, delta, mu, upper=2.0)
    assert game.n == 2
    np.testing.assert_array_equal(game.Q[1], [[1, beta], [beta, 1]])
    np.testing.assert_array_equal(game.K[2], -np.array([[delta, mu], [mu, delta]]))


# -- diagnostics -------------------------------------------------------------

@SETTINGS
@given(networks(symmetric=True, min_n=2), st.floats(0.1, 3), st.floats(0.0, 2))
def test_margin_nesting(net, k1, k2):
    from netgames.games import KappaBounds
    n = net.n_agents
    m = alpha_margins(KappaBounds(np.full(n, k1), np.full(n, k2), "exact"), spectral_measures(net))
    if m.alpha_inf > 0:
        assert m.alpha_2 > 0
    if m.alpha_2 > 0:
        assert m.alpha_min > 0


@SETTINGS
@given(lq_games())
def test_upsilon_and_monotonicity_witnesses(game):
    pu = check_p_upsilon(game)
    if pu.certified:
        assert is_p_matrix(build_upsilon(game)).certified
    sm = check_strong_monotonicity(game)
    if sm.refuted:
        w = sm.witness["direction"]
        A = game.jacobian(sm.witness["point"]).gradF
        assert w @ (A + A.T) @ w < 0


@SETTINGS
@given(st.integers(3, 10), st.floats(-5, 5))
def test_flat_direction_has_exact_zero(N, beta):
    game = flat_direction_lq(N)
    # -1/(N-1) is rounded, so "exactly zero" holds up to a few ulps of beta
    assert np.max(np.abs(game.F(np.full(N, beta)))) <= 4 * np.finfo(float).eps * abs(beta)


def _loop(F, pts, steps=200):
    total = 0.0
    ts = np.linspace(0, 1, steps + 1)
    for p, q in zip(pts, np.roll(pts, -1, axis=0)):
        vals = np.array([F(p + t * (q - p)) @ (q - p) for t in ts])
        total += trapezoid(vals, ts)
    return total


@SETTINGS
@given(networks(symmetric=True, min_n=2, max_n=5), st.floats(-1, 1), st.integers(0, 2 ** 31))
def test_exact_potential_loop_integral(net, k, seed):
    game = LinearQuadraticGame(net, K=k, a=1.0)
    assert check_potential(game).status == "exact"
    pts = np.random.default_rng(seed).uniform(-2, 2, (4, game.dim))
    assert abs(_loop(game.F, pts)) < 1e-8


# -- solvers -----------------------------------------------------------------

@SETTINGS
@given(lq_games(max_n=4), st.integers(0, 2 ** 31))
def test_relaxed_with_unit_tau_is_simultaneous(game, seed):
    x0 = game.project(np.random.default_rng(seed).uniform(0, 2, game.dim))
    a = discrete_br(game, x0, DynamicsConfig(mode="discrete_simultaneous", max_iters=30))
    b = discrete_br(game, x0, DynamicsConfig(mode="discrete_relaxed", tau=1.0, max_iters=30))
    assert a.profiles.tobytes() == b.profiles.tobytes()


@SETTINGS
@given(lq_games(max_n=4, dim=2), st.sampled_from(["discrete_sequential", "continuous_rk4", "projection"]))
def test_converged_runs_verify(game, mode):
    traj = run_dynamics(game, None, DynamicsConfig(mode=mode, step=0.3, max_iters=3000))
    if traj.converged:
        assert verify_equilibrium(game, traj.x).residual <= 1e-9


@settings(max_examples=8, deadline=None)
@given(st.floats(1.0, 1.2))
def test_races_corner_equilibria(gamma):
    eqs = brute_force_nash(races(gamma), 150).equilibria
    corners = [e for e in eqs if abs(e[0] - e[1]) > 1e-6]
    assert len(corners) == 2
    for e in corners:
        assert min(np.max(np.abs(e - [1, 5])), np.max(np.abs(e - [5, 1]))) <= 1e-6


# -- sensitivity -------------------------------------------------------------

@SETTINGS
@given(lq_games(max_n=4, dim=2))
def test_active_rows_annihilate_M(game):
    assume(check_strong_monotonicity(game).certified)
    from netgames.solvers import solve
    x = solve(game, tol=1e-12).x
    lam, _, active = kkt_multipliers(game, x)
    flags = check_regularity(game, x, lam, active)
    assume(flags.all_pass)
    res = equilibrium_sensitivity(game, x, "a")
    if active.A.shape[0]:
        assert np.max(np.abs(active.A @ res.M_matrix)) <= 1e-8


@SETTINGS
@given(arrays(float, 4, elements=st.floats(-1, 2)), st.floats(0.05, 0.3))
def test_inactive_agents_have_zero_rows(a, k):
    game = LinearQuadraticGame(make_network("complete", 4), K=k, a=a)
    from netgames.solvers import solve
    x = solve(game, tol=1e-13).x
    lam, _, active = kkt_multipliers(game, x)
    assume(check_regularity(game, x, lam, active).all_pass)
    res = equilibrium_sensitivity(game, x, "a")
    for i, _ in active.active_indices:
        assert np.all(res.grad_y_xstar[i] == 0.0)


# -- config ------------------------------------------------------------------

@SETTINGS
@given(lq_games(dim=2))
def test_config_round_trip(game):
    doc = json.loads(json.dumps(game_to_config(game)))
    assert game_from_config(doc) == game
