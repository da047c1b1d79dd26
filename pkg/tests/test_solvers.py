import numpy as np
import pytest

from netgames import ConstraintSet, LinearQuadraticGame, make_network
from netgames.solvers import (DynamicsConfig, InfeasibleStartError, StepSizeError, brute_force_nash,
                              continuous_br, default_initial_conditions, discrete_br, polish_equilibrium,
                              projection_method, run_dynamics, solve, stability_tag, verify_equilibrium)

from conftest import complete_lq, non_potential_lq, potential_lq, races, star_lq, symmetric_race_effort


def _interior_lq_solution(game):
    # unconstrained equilibrium of an affine game: grad F x = a
    return np.linalg.solve(game.gradient_matrix(), game.a.reshape(-1))


@pytest.mark.parametrize("mode", ["discrete_sequential", "discrete_relaxed", "continuous_rk4", "projection"])
def test_modes_reach_linear_solve(mode):
    game = complete_lq(4, 0.2)
    cfg = DynamicsConfig(mode=mode, tau=0.5, step=0.5, residual_tol=1e-11)
    traj = run_dynamics(game, None, cfg)
    assert traj.converged
    np.testing.assert_allclose(traj.x, _interior_lq_solution(game), atol=1e-9)


def test_simultaneous_oscillates_on_potential_game():
    traj = discrete_br(potential_lq(), np.zeros(4))
    assert traj.terminal == "oscillation_detected"
    # period-two cycle between all-zero and all-one
    np.testing.assert_allclose(traj.profiles[-1], traj.profiles[-3], atol=1e-9)


def test_sequential_fails_on_non_potential_game():
    traj = discrete_br(non_potential_lq(), np.zeros(4), DynamicsConfig(mode="discrete_sequential", max_iters=500))
    assert not traj.converged


def test_recording_conventions():
    game = complete_lq(3, 0.2)
    d = discrete_br(game, None, DynamicsConfig(max_iters=0))
    assert len(d.times) == 1 and d.terminal == "max_iters"
    c = continuous_br(game, None, DynamicsConfig(mode="continuous_rk4", h=0.1, max_iters=7, record_every=1))
    np.testing.assert_allclose(c.times, 0.1 * np.arange(8))
    s = discrete_br(game, None, DynamicsConfig(mode="discrete_relaxed", tau=0.3, max_iters=25, record_every=10))
    assert list(s.times[:3]) == [0, 10, 20] and s.times[-1] == 25


def test_rk4_matches_closed_form_flow():
    # unconstrained linear flow dx/dt = a - (I + K G) x has an explicit solution
    game = LinearQuadraticGame(make_network("complete", 2), K=0.5, a=1.0, constraints="unconstrained")
    A = game.gradient_matrix()
    xbar = np.linalg.solve(A, np.ones(2))
    x0 = np.array([2.0, -1.0])
    traj = continuous_br(game, x0, DynamicsConfig(mode="continuous_rk4", h=0.01, max_iters=100))
    w, V = np.linalg.eigh(A)
    exact = xbar + V @ (np.exp(-w * 1.0) * (V.T @ (x0 - xbar)))
    np.testing.assert_allclose(traj.x, exact, atol=1e-9)


def test_lyapunov_monitor_raises_for_huge_step():
    # linear flow with eigenvalues 0.8 and 1.6: h = 2 lies outside the RK4 stability interval
    game = complete_lq(4, 0.2, constraints="unconstrained")
    with pytest.raises(StepSizeError):
        continuous_br(game, np.full(4, 3.0), DynamicsConfig(mode="continuous_rk4", h=2.0, max_iters=400),
                      check_lyapunov=True, lyapunov_patience=5)


def test_projection_halves_step_on_divergence():
    game = complete_lq(3, 0.2, constraints="unconstrained")
    traj = projection_method(game, np.zeros(3), DynamicsConfig(mode="projection", step=3.0, max_iters=2000,
                                                                residual_tol=1e-10))
    assert traj.events and traj.converged


def test_infeasible_start():
    game = races(0.2)
    with pytest.raises(InfeasibleStartError):
        discrete_br(game, np.zeros(2))
    with pytest.raises(InfeasibleStartError):
        discrete_br(game, np.ones(3))


def test_bad_config():
    with pytest.raises(ValueError):
        DynamicsConfig(mode="newton")
    with pytest.raises(ValueError):
        DynamicsConfig(tau=0.0)


def test_verify_equilibrium_gaps():
    game = races(0.15)
    x = np.full(2, symmetric_race_effort(0.15))
    rep = verify_equilibrium(game, x)
    assert rep.is_equilibrium and rep.residual < 1e-12
    rep = verify_equilibrium(game, x + 0.1)
    assert not rep.is_equilibrium and np.all(rep.br_gaps > 0.01)


def test_polish_reaches_unstable_symmetric_race_equilibrium():
    g = 0.9
    xbar = symmetric_race_effort(g)
    y = polish_equilibrium(races(g), np.full(2, xbar + 1e-3))
    np.testing.assert_allclose(y, xbar, atol=1e-12)
    assert stability_tag(races(g), y) == "unstable"
    assert stability_tag(races(0.2), np.full(2, symmetric_race_effort(0.2))) == "stable"


def test_brute_force_races_branches():
    res = brute_force_nash(races(0.9), 200)
    assert len(res.equilibria) == 3
    xbar = symmetric_race_effort(0.9)
    assert any(np.allclose(e, xbar, atol=1e-9) for e in res.equilibria)
    asym = [e for e in res.equilibria if e[0] < e[1] - 1e-6]
    # the asymmetric pair solves x0 = 1 + g x1 (5 - x1), x1 = 1 + g x0 (5 - x0) with mirror symmetry
    x0, x1 = asym[0]
    assert x0 == pytest.approx(1 + 0.9 * x1 * (5 - x1), abs=1e-9)
    assert min(x1, 5.0) == pytest.approx(min(1 + 0.9 * x0 * (5 - x0), 5.0), abs=1e-9)
    assert any(np.allclose(e[::-1], asym[0]) for e in res.equilibria)


def test_brute_force_needs_box():
    with pytest.raises(Exception):
        brute_force_nash(complete_lq(2, 0.2), 50)
    res = brute_force_nash(complete_lq(2, 0.2), 101, box=(0.0, 2.0))
    np.testing.assert_allclose(res.equilibria[0], np.full(2, 1 / 1.2), atol=1e-9)


def test_default_initial_conditions_are_feasible_and_distinct():
    for game in (races(0.3), complete_lq(3, 0.5), star_lq()):
        starts = default_initial_conditions(game)
        assert len(starts) == 5
        assert all(game.is_feasible(s) for s in starts)
        assert len({tuple(np.round(s, 12)) for s in starts}) == 5


def test_solve_falls_back_past_oscillation():
    traj = solve(potential_lq(), np.zeros(4), tol=1e-11)
    assert traj.converged
    np.testing.assert_allclose(traj.x, np.full(4, 0.4), atol=1e-10)


def test_budget_constrained_equilibrium_satisfies_vi(rng):
    B = np.vstack([-np.eye(2), np.ones((1, 2))])
    cons = ConstraintSet.polyhedron(B, np.array([0, 0, 1.0]))
    game = LinearQuadraticGame(make_network("complete", 3), K=0.2 * np.eye(2), a=[[1.0, 0.8]] * 3,
                               constraints=cons, n=2)
    traj = solve(game, tol=1e-12)
    x = traj.x
    F = game.F(x)
    # Nash condition: F_i(x)'(y_i - x_i) >= 0 at every vertex y_i of X_i
    verts = cons.vertices()
    for i in range(3):
        for v in verts:
            assert F[2 * i:2 * i + 2] @ (v - x[2 * i:2 * i + 2]) >= -1e-9
