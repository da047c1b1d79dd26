"""Equilibrium analysis for network games.

Build a game from a :class:`~netgames.network.Network`, certify existence and
uniqueness of its Nash equilibria with :func:`netgames.diagnostics.certify`,
compute equilibria with the dynamics in :mod:`netgames.solvers`, and study how
they move with parameters using :mod:`netgames.sensitivity`.
"""

from .constraints import ConstraintSet
from .games import (
    CustomGame,
    JacobianEval,
    KappaBounds,
    LinearQuadraticGame,
    MultiActivityGame,
    RacesGame,
    best_response,
    evaluate_jacobian,
    kappa_bounds,
    neighbor_aggregate,
)
from .network import (
    Network,
    SpectralMeasures,
    infinity_norm,
    make_network,
    min_eigenvalue,
    spectral_measures,
    spectral_norm,
)

__version__ = "0.1.0"
