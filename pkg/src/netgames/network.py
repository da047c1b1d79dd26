"""Weighted directed networks and their spectral measures.

Row ``i`` of the weight matrix lists how strongly each agent ``j`` influences
agent ``i``; the neighbour aggregate of agent ``i`` is ``sum_j G[i, j] x[j]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Network",
    "SpectralMeasures",
    "NetworkValidationError",
    "AsymmetricNetworkError",
    "make_network",
    "spectral_norm",
    "infinity_norm",
    "min_eigenvalue",
    "spectral_measures",
    "is_symmetric",
    "DEFAULT_SYM_TOL",
    "EIG_RTOL",
]

DEFAULT_SYM_TOL = 1e-12
# relative accuracy attached to every eigenvalue-derived quantity
EIG_RTOL = 1e-10


class NetworkValidationError(ValueError):
    pass


class AsymmetricNetworkError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Network:
    """Validated non-negative weight matrix with zero diagonal.

    The stored array is read-only; build a new network to change weights.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = _validate(self.weights)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_agents(self) -> int:
        return self.weights.shape[0]

    def kron(self, n: int) -> np.ndarray:
        """Return ``G ⊗ I_n``, the operator mapping profiles to aggregates."""
        return np.kron(self.weights, np.eye(n))

    def with_weight(self, i: int, j: int, value: float) -> "Network":
        w = self.weights.copy()
        w[i, j] = value
        return Network(w)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"Network(n_agents={self.n_agents})"


@dataclass(frozen=True)
class SpectralMeasures:
    spectral_norm: float
    infinity_norm: float
    min_eigenvalue: Optional[float]
    is_symmetric: bool


def _validate(matrix) -> np.ndarray:
    w = np.array(matrix, dtype=float, copy=True)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise NetworkValidationError(f"weight matrix must be square, got shape {w.shape}")
    if w.shape[0] < 1:
        raise NetworkValidationError("network needs at least one agent")
    if not np.all(np.isfinite(w)):
        i, j = np.argwhere(~np.isfinite(w))[0]
        raise NetworkValidationError(f"non-finite entry at ({i}, {j})")
    diag = np.flatnonzero(np.diag(w) != 0)
    if diag.size:
        i = diag[0]
        raise NetworkValidationError(f"nonzero diagonal at ({i}, {i}): {w[i, i]}")
    neg = np.argwhere(w < 0)
    if neg.size:
        i, j = neg[0]
        raise NetworkValidationError(
            f"negative entry at ({i}, {j}): {w[i, j]}; only non-negative weights are supported"
        )
    return w


def _complete(n: int, weight: float) -> np.ndarray:
    return weight * (np.ones((n, n)) - np.eye(n))


def _ring(n: int, weight: float) -> np.ndarray:
    w = np.zeros((n, n))
    for i in range(n):
        for j in ((i - 1) % n, (i + 1) % n):
            if j != i:
                w[i, j] = weight
    return w


def _bipartite(n1: int, n2: int, weight: float) -> np.ndarray:
    n = n1 + n2
    w = np.zeros((n, n))
    w[:n1, n1:] = weight
    w[n1:, :n1] = weight
    return w


def _directed_regular(n: int, degree: int, weight: float, pattern: str) -> np.ndarray:
    # Every agent has exactly `degree` in-neighbours, so each row sums to degree*weight.
    if not 1 <= degree < n:
        raise NetworkValidationError(f"in-degree must lie in [1, {n - 1}], got {degree}")
    w = np.zeros((n, n))
    if pattern == "circulant":
        for i in range(n):
            for s in range(1, degree + 1):
                w[i, (i + s) % n] = weight
    elif pattern == "hub":
        if degree >= n - 1 and n > 2:
            raise NetworkValidationError("hub pattern needs degree < n - 1")
        hubs = range(degree)
        for i in range(n):
            if i < degree:
                w[i, [h for h in hubs if h != i]] = weight
                w[i, degree + i % (n - degree)] = weight
            else:
                w[i, list(hubs)] = weight
    else:
        raise NetworkValidationError(f"unknown directed_regular pattern {pattern!r}")
    return w


def _star(n: int, weight: float) -> np.ndarray:
    w = np.zeros((n, n))
    w[1:, 0] = weight
    return w


def _trend_setter(n: int, leader_weight: float, follower_weight: float) -> np.ndarray:
    w = follower_weight * (np.ones((n, n)) - np.eye(n))
    w[:, 0] = leader_weight
    w[0, :] = follower_weight
    w[0, 0] = 0.0
    return w


def make_network(kind: str, n: Optional[int] = None, *, weight: float = 1.0,
                 matrix: Optional[Sequence[Sequence[float]]] = None,
                 sizes: Optional[Sequence[int]] = None, degree: int = 2,
                 pattern: str = "hub", leader_weight: float = 1.0,
                 follower_weight: float = 0.1) -> Network:
    """Build a network from a named generator or an explicit matrix.

    Parameters
    ----------
    kind : str
        One of ``complete``, ``undirected_ring``, ``bipartite_complete``,
        ``directed_regular``, ``asymmetric_star``, ``trend_setter`` or
        ``explicit``.
    n : int, optional
        Number of agents. ``bipartite_complete`` splits it evenly unless
        ``sizes`` is given; ``trend_setter`` defaults to 4.
    weight : float
        Common edge weight of the named generators.
    matrix : array_like, optional
        Weights for ``explicit``.
    sizes : pair of int, optional
        Part sizes for ``bipartite_complete``.
    degree, pattern :
        In-degree and wiring for ``directed_regular``. ``pattern="hub"``
        routes every agent to the first ``degree`` agents (hubs listen to
        each other and to one follower); ``"circulant"`` links ``i`` to
        ``i+1, ..., i+degree`` modulo ``n``.
    leader_weight, follower_weight : float
        Weights for ``trend_setter``: everyone follows agent 0 with
        ``leader_weight`` and every other link carries ``follower_weight``.

    Returns
    -------
    Network
    """
    if kind == "explicit":
        if matrix is None:
            raise NetworkValidationError("explicit network needs a matrix")
        return Network(matrix)
    if kind == "trend_setter":
        n = 4 if n is None else n
    if kind == "bipartite_complete" and sizes is not None:
        n = int(sum(sizes))
    if n is None or int(n) != n or n < 1:
        raise NetworkValidationError(f"network size must be a positive integer, got {n!r}")
    n = int(n)
    if weight < 0:
        raise NetworkValidationError(f"negative weight {weight}")

    if kind == "complete":
        w = _complete(n, weight)
    elif kind == "undirected_ring":
        w = _ring(n, weight)
    elif kind == "bipartite_complete":
        n1, n2 = (sizes if sizes is not None else (n // 2, n - n // 2))
        w = _bipartite(int(n1), int(n2), weight)
    elif kind == "directed_regular":
        w = _directed_regular(n, int(degree), weight, pattern)
    elif kind == "asymmetric_star":
        w = _star(n, weight)
    elif kind == "trend_setter":
        w = _trend_setter(n, leader_weight, follower_weight)
    else:
        raise NetworkValidationError(f"unknown network kind {kind!r}")
    return Network(w)


def _weights(net) -> np.ndarray:
    return net.weights if isinstance(net, Network) else np.asarray(net, dtype=float)


def spectral_norm(net) -> float:
    """Largest singular value of the weight matrix."""
    w = _weights(net)
    if not w.any():
        return 0.0
    return float(np.linalg.svd(w, compute_uv=False)[0])


def infinity_norm(net) -> float:
    """Maximum row sum (entries are non-negative)."""
    return float(np.max(np.abs(_weights(net)).sum(axis=1)))


def is_symmetric(net, sym_tol: float = DEFAULT_SYM_TOL) -> bool:
    w = _weights(net)
    return bool(np.max(np.abs(w - w.T), initial=0.0) <= sym_tol)


def min_eigenvalue(net, sym_tol: float = DEFAULT_SYM_TOL) -> float:
    """Smallest eigenvalue of the symmetrised weight matrix.

    Raises
    ------
    AsymmetricNetworkError
        If some pair of mirrored entries differs by more than ``sym_tol``.
    """
    w = _weights(net)
    if not is_symmetric(w, sym_tol):
        raise AsymmetricNetworkError("minimum eigenvalue undefined for asymmetric network")
    return float(np.linalg.eigvalsh(0.5 * (w + w.T))[0])


def spectral_measures(net, sym_tol: float = DEFAULT_SYM_TOL) -> SpectralMeasures:
    sym = is_symmetric(net, sym_tol)
    return SpectralMeasures(
        spectral_norm=spectral_norm(net),
        infinity_norm=infinity_norm(net),
        min_eigenvalue=min_eigenvalue(net, sym_tol) if sym else None,
        is_symmetric=sym,
    )
