"""Specialisation in a two-player effort race.

For small prize sensitivity gamma the race has one symmetric equilibrium.
Past a threshold two asymmetric equilibria split off, one agent working hard
and the other barely at all, and the symmetric one loses stability.
"""

import numpy as np

from netgames import RacesGame, make_network
from netgames.diagnostics import certify, Conclusion
from netgames.solvers import brute_force_nash, stability_tag

net = make_network("complete", 2)


def equilibria(gamma, resolution=300):
    game = RacesGame(net, a=1.0, b=5.0, gamma=gamma)
    return game, brute_force_nash(game, resolution).equilibria


print(f"{'gamma':>6}  {'#eq':>3}  equilibria (stability, total effort)")
for gamma in (0.1, 0.2, 0.3, 0.45, 0.5, 0.6, 0.8, 1.0, 1.2):
    game, eqs = equilibria(gamma)
    desc = "; ".join(f"({e[0]:.3f}, {e[1]:.3f}) {stability_tag(game, e)} {e.sum():.3f}" for e in eqs)
    print(f"{gamma:6.2f}  {len(eqs):3d}  {desc}")

lo, hi = 0.45, 0.55
for _ in range(25):
    mid = 0.5 * (lo + hi)
    lo, hi = (mid, hi) if len(equilibria(mid, 400)[1]) == 1 else (lo, mid)
print(f"\nbifurcation located in [{lo:.4f}, {hi:.4f}]")

cert = [g for g in np.linspace(0.05, 0.5, 46) if certify(RacesGame(net, 1.0, 5.0, gamma=g))
        .has(Conclusion.EXISTENCE_UNIQUENESS)]
print(f"uniqueness is certified up to gamma = {max(cert):.2f}; "
      "the sufficient conditions are conservative compared with the true threshold")
