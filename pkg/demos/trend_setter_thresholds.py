"""How the choice of network norm changes what can be certified.

On the trend-setter network, everyone follows agent 0 strongly while agent 0
barely listens back. The spectral-norm margin turns negative well before the
infinity-norm margin does, so for moderate complementarity the row-sum
condition is the only network-norm test that still certifies uniqueness.
Exact tests on the constant Jacobian reach further still.
"""

import numpy as np

from netgames import LinearQuadraticGame, make_network, spectral_measures
from netgames.diagnostics import Conclusion, certify
from netgames.solvers import solve

net = make_network("trend_setter")
sm = spectral_measures(net)
print(f"||G||_2 = {sm.spectral_norm:.5f}   ||G||_inf = {sm.infinity_norm:.5f}")
print(f"spectral margin closes at delta = {1 / sm.spectral_norm:.4f}, "
      f"row-sum margin at delta = {1 / sm.infinity_norm:.4f}\n")

print(f"{'delta':>6} {'alpha_2':>9} {'alpha_inf':>9}  routes for uniqueness")
for delta in np.arange(0.4, 0.95, 0.05):
    game = LinearQuadraticGame(net, K=-delta, a=1.0)
    rep = certify(game)
    routes = sorted({r.value for r in rep.routes(Conclusion.EXISTENCE_UNIQUENESS)})
    print(f"{delta:6.2f} {rep.margins.alpha_2:9.4f} {rep.margins.alpha_inf:9.4f}  {', '.join(routes) or '-'}")

game = LinearQuadraticGame(net, K=-0.8, a=1.0)
x = solve(game, tol=1e-12).x
print("\nequilibrium at delta = 0.8:", np.round(x, 6))
print("the leader's effort is amplified less than the followers', who all copy it")
