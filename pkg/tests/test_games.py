import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

from netgames import (ConstraintSet, CustomGame, LinearQuadraticGame, MultiActivityGame, RacesGame,
                      best_response, kappa_bounds, make_network, neighbor_aggregate)
from netgames.games import GameValidationError

from conftest import fd_jacobian, races


def _random_lq(rng, N=4, n=2, constraints=None):
    G = rng.uniform(size=(N, N)) * (1 - np.eye(N))
    M = rng.normal(size=(N, n, n))
    Q = np.einsum("ijk,ilk->ijl", M, M) + np.eye(n)
    return LinearQuadraticGame(G, K=rng.normal(size=(N, n, n)) * 0.3, a=rng.normal(size=(N, n)),
                               Q=Q, n=n, constraints=constraints)


def test_F_is_the_own_cost_gradient(rng):
    game = _random_lq(rng)
    x = rng.normal(size=game.dim)
    zb = game.aggregate(x)
    xb = x.reshape(game.N, game.n)
    for i in range(game.N):
        g = fd_jacobian(lambda y: np.atleast_1d(game.cost(i, y, zb[i])), xb[i])[0]
        np.testing.assert_allclose(game.F(x)[i * game.n:(i + 1) * game.n], g, atol=1e-6)


@pytest.mark.parametrize("build", [
    lambda rng: _random_lq(rng),
    lambda rng: races(0.3),
    lambda rng: MultiActivityGame(make_network("undirected_ring", 4), 1.0, 0.8, 0.2, 0.1, 0.05),
])
def test_jacobian_matches_finite_differences(rng, build):
    game = build(rng)
    lo, hi = game.box_bounds()
    lo, hi = np.maximum(lo, -1), np.minimum(hi, 3)
    for _ in range(5):
        x = rng.uniform(lo, hi)
        np.testing.assert_allclose(game.jacobian(x).gradF, fd_jacobian(game.F, x), atol=1e-5)


def test_lq_best_response_on_nonneg_is_max_formula():
    game = LinearQuadraticGame(make_network("complete", 3), K=0.5, a=1.0, constraints="nonneg")
    x = np.array([0.5, 3.0, 0.1])
    z = game.aggregate(x)[:, 0]
    np.testing.assert_allclose(game.best_response(x), np.maximum(0, 1 - 0.5 * z))


def test_best_response_minimises_cost_on_budget_set(rng):
    B = np.vstack([-np.eye(2), np.ones((1, 2))])
    cons = ConstraintSet.polyhedron(B, np.array([0, 0, 1.0]))
    game = _random_lq(rng, N=3, n=2, constraints=cons)
    zb = game.aggregate(rng.uniform(0, 1, game.dim))
    for i in range(game.N):
        y = best_response(game, i, zb[i])
        ref = minimize(lambda v: game.cost(i, v, zb[i]), np.array([0.3, 0.3]), method="SLSQP",
                       constraints=[{"type": "ineq", "fun": lambda v: np.array([0, 0, 1.0]) - B @ v}],
                       options={"ftol": 1e-14})
        assert cons.contains(y)
        assert game.cost(i, y, zb[i]) <= ref.fun + 1e-9


def test_races_best_response_against_scalar_minimiser():
    game = races(0.4)
    for z in (1.0, 2.5, 4.0, 5.0):
        y = game.agent_best_response(0, np.array([z]))
        ref = minimize_scalar(lambda v: game.cost(0, np.array([v]), np.array([z])), bounds=(1.0, 5.0),
                              method="bounded", options={"xatol": 1e-10})
        assert y[0] == pytest.approx(ref.x, abs=1e-6)


def test_races_kappa_is_exact_endpoint_maximum():
    game = races(0.3)
    kb = game.kappa_bounds()
    zs = np.linspace(1.0, 5.0, 10_001)
    assert kb.kappa2 == pytest.approx(np.max(np.abs(0.3 * (5 - 2 * zs))))
    assert kb.certifying and kb.kappa1 == 1.0


def test_lq_kappa_values():
    game = LinearQuadraticGame(make_network("complete", 3), K=[0.2, -0.7, 0.4], a=1.0, Q=2.0)
    kb = kappa_bounds(game)
    assert kb.kappa1 == 2.0 and kb.kappa2 == pytest.approx(0.7)


def test_multi_activity_blocks():
    game = MultiActivityGame(make_network("complete", 2), 1.0, 2.0, beta=0.3, delta=0.2, mu=0.1,
                             upper=4.0, budget_upper=5.0)
    np.testing.assert_allclose(game.Q[0], [[1, 0.3], [0.3, 1]])
    np.testing.assert_allclose(game.K[1], [[-0.2, -0.1], [-0.1, -0.2]])
    kb = game.kappa_bounds()
    assert kb.kappa1 == pytest.approx(0.7) and kb.kappa2 == pytest.approx(0.3)
    assert game.constraints[0].contains([2.5, 2.5]) and not game.constraints[0].contains([3, 3])
    with pytest.raises(GameValidationError):
        MultiActivityGame(make_network("complete", 2), 1, 1, beta=1.0, delta=0, mu=0)


def test_custom_game_reproduces_lq(rng):
    lq = LinearQuadraticGame(make_network("undirected_ring", 5), K=0.3, a=1.0,
                             constraints=ConstraintSet.box(0, 2))
    custom = CustomGame(lq.network, 1,
                        gradient=lambda i, x, z: x + 0.3 * z - 1.0,
                        own_hessian=lambda i, x, z: np.eye(1),
                        cross_hessian=lambda i, x, z: 0.3 * np.eye(1),
                        constraints=ConstraintSet.box(0, 2))
    x = rng.uniform(0, 2, 5)
    np.testing.assert_allclose(custom.F(x), lq.F(x))
    np.testing.assert_allclose(custom.best_response(x), lq.best_response(x), atol=1e-9)
    kb = custom.kappa_bounds()
    assert kb.exactness == "sampled" and kb.kappa2 == pytest.approx(0.3)


def test_custom_callback_shape_error():
    game = CustomGame(make_network("complete", 2), 2, gradient=lambda i, x, z: np.zeros(3),
                      own_hessian=lambda i, x, z: np.eye(2), cross_hessian=lambda i, x, z: np.eye(2))
    with pytest.raises(GameValidationError, match="agent 0"):
        game.F(np.zeros(4))


def test_validation_errors():
    with pytest.raises(GameValidationError):
        LinearQuadraticGame(make_network("complete", 2), K=0.1, a=1.0, Q=-1.0)
    with pytest.raises(GameValidationError):
        RacesGame(make_network("complete", 2), a=2.0, b=1.0, gamma=0.1)
    with pytest.raises(GameValidationError):
        LinearQuadraticGame(make_network("complete", 2), K=0.1, a=1.0).F(np.zeros(3))


def test_aggregate_and_param_plumbing(rng):
    game = _random_lq(rng, N=3, n=2)
    x = rng.normal(size=6)
    np.testing.assert_allclose(neighbor_aggregate(game, x), (game.G @ x.reshape(3, 2)).ravel())
    y = game.param_vector("a") + 1
    moved = game.with_param("a", y)
    np.testing.assert_allclose(moved.F(x) - game.F(x), -1.0)
    np.testing.assert_array_equal(game.param_jacobian(x, "a"), -np.eye(6))
    assert moved != game and game.with_param("a", game.param_vector("a")) == game


def test_races_gamma_param_jacobian(rng):
    game = races(0.3)
    x = rng.uniform(1, 5, 2)
    fd = (game.with_param("gamma", 0.3 + 1e-6).F(x) - game.with_param("gamma", 0.3 - 1e-6).F(x)) / 2e-6
    np.testing.assert_allclose(game.param_jacobian(x, "gamma")[:, 0], fd, atol=1e-6)


def test_natural_residual_zero_at_equilibrium():
    game = LinearQuadraticGame(make_network("complete", 3), K=0.5, a=1.0)
    xbar = np.full(3, 1 / 2.0)  # x = 1 - 0.5 * 2x
    assert game.natural_residual(xbar) < 1e-14
    assert game.natural_residual(xbar + 0.1) > 0.1
