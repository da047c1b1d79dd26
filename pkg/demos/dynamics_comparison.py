"""Three best-response dynamics on two nearly identical games.

Four agents on a complete network. In the first game all cross effects
equal 0.5: a potential game where simultaneous updates flip between all-zero
and all-one forever, while sequential and continuous updates settle. Making
agent 0 a strong complement (weight -1.5) breaks the potential, and only the
continuous dynamics still converges.
"""

import numpy as np

from netgames import LinearQuadraticGame, make_network
from netgames.diagnostics import certify
from netgames.solvers import DynamicsConfig, default_initial_conditions, run_dynamics

net = make_network("complete", 4)
games = {
    "common substitutes": LinearQuadraticGame(net, K=0.5, a=1.0),
    "one strong complement": LinearQuadraticGame(net, K=[-1.5, 0.5, 0.5, 0.5], a=1.0),
}
modes = ("discrete_simultaneous", "discrete_sequential", "continuous_rk4")

for name, game in games.items():
    rep = certify(game)
    print(f"== {name}: strong monotonicity {rep.strong_monotone.status}, potential {rep.potential.status}")
    for mode in modes:
        outcomes = []
        for x0 in default_initial_conditions(game):
            traj = run_dynamics(game, x0, DynamicsConfig(mode=mode, max_iters=4000))
            outcomes.append(traj.terminal)
        print(f"   {mode:<22} " + ", ".join(sorted(set(outcomes))))
    x = run_dynamics(game, None, DynamicsConfig(mode="continuous_rk4")).x
    print("   equilibrium:", np.round(x, 6))
