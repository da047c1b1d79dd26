"""Network games: costs, best responses and the game Jacobian.

A profile is a flat vector of length ``N * n`` in agent-major order, so agent
``i`` owns ``x[i*n:(i+1)*n]``. ``F`` stacks each agent's own-strategy cost
gradient and ``grad F = blockdiag(D) + blockdiag(K) (G ⊗ I_n)``.

Linear-quadratic costs are written with a benefit intercept,
``J_i = 0.5 x_i'Q_i x_i + (K_i z_i - a_i)'x_i``, so that with ``Q = 1`` and
``X_i = [0, inf)`` the best response is ``max(0, a_i - K_i z_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import block_diag
from scipy.stats import qmc

from .constraints import ConstraintSet
from .network import Network, make_network

__all__ = [
    "JacobianEval",
    "KappaBounds",
    "NetworkGame",
    "LinearQuadraticGame",
    "RacesGame",
    "MultiActivityGame",
    "CustomGame",
    "GameValidationError",
    "neighbor_aggregate",
    "evaluate_jacobian",
    "best_response",
    "kappa_bounds",
    "KAPPA_SAMPLES",
    "SAMPLER_SEED",
]

KAPPA_SAMPLES = 10_000
SAMPLER_SEED = 20240531
BR_TOL = 1e-10


class GameValidationError(ValueError):
    pass


@dataclass(frozen=True)
class JacobianEval:
    F: np.ndarray
    gradF: np.ndarray
    D_blocks: np.ndarray
    K_blocks: np.ndarray


@dataclass(frozen=True)
class KappaBounds:
    kappa1_per_agent: np.ndarray
    kappa2_per_agent: np.ndarray
    exactness: str  # "exact" | "user_supplied" | "sampled"

    @property
    def kappa1(self) -> float:
        return float(np.min(self.kappa1_per_agent))

    @property
    def kappa2(self) -> float:
        return float(np.max(self.kappa2_per_agent))

    @property
    def certifying(self) -> bool:
        return self.exactness != "sampled"


def _as_network(net) -> Network:
    return net if isinstance(net, Network) else make_network("explicit", matrix=net)


def _per_agent_blocks(value, N: int, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        out = np.broadcast_to(arr * np.eye(n), (N, n, n))
    elif arr.ndim == 1 and n == 1 and arr.size == N:
        out = arr.reshape(N, 1, 1)
    elif arr.shape == (n, n):
        out = np.broadcast_to(arr, (N, n, n))
    elif arr.shape == (N, n, n):
        out = arr
    else:
        raise GameValidationError(f"{name} has shape {arr.shape}, expected scalar, ({n},{n}) or ({N},{n},{n})")
    out = np.array(out, dtype=float)
    out.setflags(write=False)
    return out


def _per_agent_vectors(value, N: int, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        out = np.full((N, n), float(arr))
    elif arr.size == N * n:
        out = arr.reshape(N, n)
    elif arr.shape == (n,):
        out = np.broadcast_to(arr, (N, n))
    else:
        raise GameValidationError(f"{name} has shape {arr.shape}, expected ({N},{n})")
    out = np.array(out, dtype=float)
    out.setflags(write=False)
    return out


def _constraint_list(constraints, N: int, n: int):
    if constraints is None or constraints == "nonneg":
        return tuple(ConstraintSet.nonneg(n) for _ in range(N))
    if constraints == "unconstrained":
        return tuple(ConstraintSet.unconstrained(n) for _ in range(N))
    if isinstance(constraints, ConstraintSet):
        cons = (constraints,) * N
    else:
        cons = tuple(constraints)
    if len(cons) != N or any(c.dim != n for c in cons):
        raise GameValidationError(f"need {N} constraint sets of dimension {n}")
    return cons


class NetworkGame:
    """Base class holding the network, strategy dimension and constraint sets."""

    family = "abstract"
    network: Network
    n: int
    constraints: tuple

    @property
    def N(self) -> int:
        return self.network.n_agents

    @property
    def dim(self) -> int:
        return self.N * self.n

    @property
    def G(self) -> np.ndarray:
        return self.network.weights

    # -- shapes ---------------------------------------------------------
    def blocks(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size != self.dim:
            raise GameValidationError(f"profile has size {x.size}, expected {self.dim}")
        return x.reshape(self.N, self.n)

    def aggregate(self, x) -> np.ndarray:
        """Neighbour aggregates ``z_i = sum_j G_ij x_j`` as an ``(N, n)`` array."""
        return self.G @ self.blocks(x)

    # -- family hooks ---------------------------------------------------
    def agent_gradient(self, xb: np.ndarray, zb: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def agent_hessians(self, xb: np.ndarray, zb: np.ndarray):
        raise NotImplementedError

    def agent_best_response(self, i: int, z_i: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def projection_metric(self) -> Optional[np.ndarray]:
        """``Q`` blocks when costs read ``0.5||x_i||_Q^2 + f_i(z_i)'x_i``, else ``None``."""
        return None

    def cost(self, i: int, y, z):
        """Cost of agent ``i`` at own strategy ``y`` and aggregate ``z`` (broadcasting)."""
        raise NotImplementedError

    def kappa_bounds(self, box=None, seed: int = SAMPLER_SEED) -> KappaBounds:
        raise NotImplementedError

    @property
    def is_affine(self) -> bool:
        return False

    # -- parameters -------------------------------------------------------
    parameter_names: tuple = ()

    def param_vector(self, name: str) -> np.ndarray:
        raise KeyError(name)

    def with_param(self, name: str, value) -> "NetworkGame":
        raise KeyError(name)

    def param_jacobian(self, x, name: str) -> np.ndarray:
        raise KeyError(name)

    def with_network(self, network: Network) -> "NetworkGame":
        raise NotImplementedError

    # -- derived operators -----------------------------------------------
    def F(self, x) -> np.ndarray:
        xb = self.blocks(x)
        return self.agent_gradient(xb, self.G @ xb).reshape(-1)

    def jacobian(self, x) -> JacobianEval:
        xb = self.blocks(x)
        zb = self.G @ xb
        F = self.agent_gradient(xb, zb).reshape(-1)
        D, K = self.agent_hessians(xb, zb)
        grad = block_diag(*D) + block_diag(*K) @ self.network.kron(self.n)
        return JacobianEval(F=F, gradF=grad, D_blocks=D, K_blocks=K)

    def best_response(self, x) -> np.ndarray:
        """Simultaneous best response ``B(x)`` of all agents."""
        zb = self.aggregate(x)
        return np.concatenate([self.agent_best_response(i, zb[i]) for i in range(self.N)])

    def project(self, x) -> np.ndarray:
        xb = self.blocks(x)
        return np.concatenate([c.project(xb[i]) for i, c in enumerate(self.constraints)])

    def natural_residual(self, x) -> float:
        """``||x - Pi_X[x - F(x)]||``; zero exactly at Nash equilibria."""
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x - self.F(x))))

    def is_feasible(self, x, tol: float = 1e-9) -> bool:
        xb = self.blocks(x)
        return all(c.contains(xb[i], tol) for i, c in enumerate(self.constraints))

    def lyapunov(self, x) -> float:
        """``F(x)'(x - B(x)) - 0.5 ||x - B(x)||_Q^2`` for projection-form costs."""
        Q = self.projection_metric()
        if Q is None:
            raise NotImplementedError("Lyapunov function needs projection-form costs")
        x = np.asarray(x, dtype=float)
        d = (x - self.best_response(x)).reshape(self.N, self.n)
        quad = np.einsum("ij,ijk,ik->", d, Q, d)
        return float(self.F(x) @ d.reshape(-1) - 0.5 * quad)

    def box_bounds(self):
        """Stacked coordinate bounds of ``X`` (may be infinite)."""
        lo, hi = zip(*(c.bounding_box() for c in self.constraints))
        return np.concatenate(lo), np.concatenate(hi)

    def default_start(self) -> np.ndarray:
        return self.project(np.zeros(self.dim))

    # -- equality ---------------------------------------------------------
    def _identity(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        a, b = self._identity(), other._identity()
        if a.keys() != b.keys():
            return False
        for k in a:
            u, v = a[k], b[k]
            if isinstance(u, np.ndarray) or isinstance(v, np.ndarray):
                if not np.array_equal(np.asarray(u), np.asarray(v)):
                    return False
            elif u != v:
                return False
        return True

    __hash__ = None


# ---------------------------------------------------------------------------
# linear-quadratic family
# ---------------------------------------------------------------------------

class LinearQuadraticGame(NetworkGame):
    """Costs ``0.5 x_i'Q_i x_i + (K_i z_i - a_i)'x_i``.

    Parameters
    ----------
    network : Network or array_like
    K : scalar, (N,) for scalar games, (n, n) or (N, n, n)
        Cross-effect blocks. Positive entries make actions substitutes.
    a : scalar, (N,) or (N, n)
        Stand-alone marginal benefit.
    Q : scalar, (n, n) or (N, n, n), default 1
        Symmetric positive-definite own-curvature blocks.
    constraints : ``"nonneg"``, ``"unconstrained"``, ConstraintSet or list
    n : int, default 1
        Strategy dimension.
    """

    family = "linear_quadratic"
    parameter_names = ("a",)

    def __init__(self, network, K, a, Q=1.0, constraints=None, n: int = 1):
        self.network = _as_network(network)
        self.n = int(n)
        N = self.network.n_agents
        self.Q = _per_agent_blocks(Q, N, self.n, "Q")
        self.K = _per_agent_blocks(K, N, self.n, "K")
        self.a = _per_agent_vectors(a, N, self.n, "a")
        self.constraints = _constraint_list(constraints, N, self.n)
        for i, q in enumerate(self.Q):
            if not np.allclose(q, q.T, atol=1e-12, rtol=0):
                raise GameValidationError(f"Q block of agent {i} is not symmetric")
            if np.linalg.eigvalsh(q)[0] <= 0:
                raise GameValidationError(f"Q block of agent {i} is not positive definite")

    @property
    def is_affine(self) -> bool:
        return True

    def agent_gradient(self, xb, zb):
        return np.einsum("ijk,ik->ij", self.Q, xb) + np.einsum("ijk,ik->ij", self.K, zb) - self.a

    def agent_hessians(self, xb, zb):
        return np.array(self.Q), np.array(self.K)

    def agent_best_response(self, i, z_i):
        c = self.K[i] @ np.asarray(z_i, dtype=float).reshape(self.n) - self.a[i]
        return self.constraints[i].minimize_quadratic(self.Q[i], c)

    def projection_metric(self):
        return np.array(self.Q)

    def cost(self, i, y, z):
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        quad = 0.5 * np.einsum("...j,jk,...k->...", y, self.Q[i], y)
        lin = np.einsum("...j,...j->...", np.einsum("jk,...k->...j", self.K[i], z) - self.a[i], y)
        return quad + lin

    def kappa_bounds(self, box=None, seed=SAMPLER_SEED):
        k1 = np.array([np.linalg.eigvalsh(q)[0] for q in self.Q])
        k2 = np.array([np.linalg.norm(k, 2) for k in self.K])
        return KappaBounds(k1, k2, "exact")

    def gradient_matrix(self) -> np.ndarray:
        """Constant Jacobian ``grad F`` of the affine operator."""
        return self.jacobian(np.zeros(self.dim)).gradF

    def param_vector(self, name):
        if name != "a":
            raise KeyError(name)
        return self.a.reshape(-1).copy()

    def with_param(self, name, value):
        if name != "a":
            raise KeyError(name)
        return self._rebuild(a=np.asarray(value, dtype=float).reshape(self.N, self.n))

    def param_jacobian(self, x, name):
        if name != "a":
            raise KeyError(name)
        return -np.eye(self.dim)

    def with_network(self, network):
        return self._rebuild(network=network)

    def _rebuild(self, **changes):
        kw = dict(network=self.network, K=self.K, a=self.a, Q=self.Q,
                  constraints=self.constraints, n=self.n)
        kw.update(changes)
        return LinearQuadraticGame(**kw)

    def _identity(self):
        return {"G": self.G, "n": self.n, "Q": self.Q, "K": self.K, "a": self.a,
                "constraints": self.constraints}


class MultiActivityGame(LinearQuadraticGame):
    """Two activities per agent with own-activity coupling ``beta``.

    Payoffs are ``a_A x_A + a_B x_B - 0.5 (x_A^2 + x_B^2) - beta x_A x_B
    + delta (x_A z_A + x_B z_B) + mu (x_A z_B + x_B z_A)``, so
    ``Q_i = [[1, beta_i], [beta_i, 1]]`` and ``K_i = -[[delta, mu], [mu, delta]]``.
    Each activity lies in ``[lower, upper]`` and the total ``x_A + x_B`` in
    ``[budget_lower, budget_upper]``.
    """

    family = "multi_activity"
    parameter_names = ("a",)

    def __init__(self, network, a_A, a_B, beta, delta: float, mu: float,
                 lower=0.0, upper=np.inf, budget_lower=-np.inf, budget_upper=np.inf):
        network = _as_network(network)
        N = network.n_agents
        self.a_A = np.broadcast_to(np.asarray(a_A, float), (N,)).copy()
        self.a_B = np.broadcast_to(np.asarray(a_B, float), (N,)).copy()
        self.beta = np.broadcast_to(np.asarray(beta, float), (N,)).copy()
        if np.any(np.abs(self.beta) >= 1):
            raise GameValidationError("beta must lie in (-1, 1)")
        self.delta = float(delta)
        self.mu = float(mu)
        self.lower = np.broadcast_to(np.asarray(lower, float), (N,)).copy()
        self.upper = np.broadcast_to(np.asarray(upper, float), (N,)).copy()
        self.budget_lower = np.broadcast_to(np.asarray(budget_lower, float), (N,)).copy()
        self.budget_upper = np.broadcast_to(np.asarray(budget_upper, float), (N,)).copy()
        Q = np.array([[[1.0, bt], [bt, 1.0]] for bt in self.beta])
        K = -np.array([[self.delta, self.mu], [self.mu, self.delta]])
        cons = [self._agent_set(i) for i in range(N)]
        super().__init__(network, K=K, a=np.column_stack([self.a_A, self.a_B]), Q=Q,
                         constraints=cons, n=2)

    def _agent_set(self, i):
        rows, rhs = [], []
        for k in range(2):
            e = np.eye(2)[k]
            if np.isfinite(self.lower[i]):
                rows.append(-e)
                rhs.append(-self.lower[i])
            if np.isfinite(self.upper[i]):
                rows.append(e)
                rhs.append(self.upper[i])
        if np.isfinite(self.budget_lower[i]):
            rows.append(-np.ones(2))
            rhs.append(-self.budget_lower[i])
        if np.isfinite(self.budget_upper[i]):
            rows.append(np.ones(2))
            rhs.append(self.budget_upper[i])
        if not rows:
            return ConstraintSet.unconstrained(2)
        return ConstraintSet.polyhedron(np.array(rows), np.array(rhs), dim=2)

    def kappa_bounds(self, box=None, seed=SAMPLER_SEED):
        N = self.N
        return KappaBounds(1 - np.abs(self.beta), np.full(N, abs(self.delta) + abs(self.mu)), "exact")

    def with_param(self, name, value):
        if name != "a":
            raise KeyError(name)
        v = np.asarray(value, dtype=float).reshape(self.N, 2)
        return self._rebuild(a_A=v[:, 0], a_B=v[:, 1])

    def _rebuild(self, **changes):
        kw = dict(network=self.network, a_A=self.a_A, a_B=self.a_B, beta=self.beta,
                  delta=self.delta, mu=self.mu, lower=self.lower, upper=self.upper,
                  budget_lower=self.budget_lower, budget_upper=self.budget_upper)
        kw.update(changes)
        return MultiActivityGame(**kw)

    def _identity(self):
        return {"G": self.G, "a_A": self.a_A, "a_B": self.a_B, "beta": self.beta,
                "delta": self.delta, "mu": self.mu, "lower": self.lower, "upper": self.upper,
                "budget_lower": self.budget_lower, "budget_upper": self.budget_upper}


# ---------------------------------------------------------------------------
# races / tournaments
# ---------------------------------------------------------------------------

class RacesGame(NetworkGame):
    """Effort races: ``J_i = 0.5 x_i^2 - (a_i + phi_i(z_i)) x_i`` on ``[a_i, b_i]``.

    With ``gamma`` given the prize term is ``phi_i(z) = gamma z (b_i - z)``.
    Otherwise ``phi(i, z)`` and ``dphi(i, z)`` must be supplied and accept
    array ``z``.
    """

    family = "races"

    def __init__(self, network, a, b, gamma: Optional[float] = None,
                 phi: Optional[Callable] = None, dphi: Optional[Callable] = None):
        self.network = _as_network(network)
        N = self.network.n_agents
        self.n = 1
        self.a = np.broadcast_to(np.asarray(a, float), (N,)).copy()
        self.b = np.broadcast_to(np.asarray(b, float), (N,)).copy()
        if np.any(self.a <= 0) or np.any(self.a >= self.b):
            raise GameValidationError("races need 0 < a_i < b_i")
        if gamma is None and (phi is None or dphi is None):
            raise GameValidationError("races need gamma or both phi and dphi")
        if gamma is not None and gamma <= 0:
            raise GameValidationError("gamma must be positive")
        self.gamma = None if gamma is None else float(gamma)
        self._phi = phi
        self._dphi = dphi
        self.constraints = tuple(ConstraintSet.box(lo, hi) for lo, hi in zip(self.a, self.b))

    @property
    def parameter_names(self):
        return ("gamma",) if self.gamma is not None else ()

    def _phi_agent(self, i, z):
        if self.gamma is not None:
            return self.gamma * z * (self.b[i] - z)
        return self._phi(i, z)

    def _dphi_agent(self, i, z):
        if self.gamma is not None:
            return self.gamma * (self.b[i] - 2 * z)
        return self._dphi(i, z)

    def agent_gradient(self, xb, zb):
        z = zb[:, 0]
        phi = np.array([self._phi_agent(i, z[i]) for i in range(self.N)])
        return (xb[:, 0] - self.a - phi).reshape(-1, 1)

    def agent_hessians(self, xb, zb):
        z = zb[:, 0]
        D = np.ones((self.N, 1, 1))
        K = -np.array([self._dphi_agent(i, z[i]) for i in range(self.N)]).reshape(self.N, 1, 1)
        return D, K

    def agent_best_response(self, i, z_i):
        z = float(np.asarray(z_i).reshape(-1)[0])
        return np.array([np.clip(self.a[i] + self._phi_agent(i, z), self.a[i], self.b[i])])

    def projection_metric(self):
        return np.ones((self.N, 1, 1))

    def cost(self, i, y, z):
        y = np.asarray(y, dtype=float)[..., 0]
        z = np.asarray(z, dtype=float)[..., 0]
        return 0.5 * y * y - (self.a[i] + self._phi_agent(i, z)) * y

    def aggregate_range(self):
        """Exact range of each ``z_i`` over ``X``."""
        return self.G @ self.a, self.G @ self.b

    def kappa_bounds(self, box=None, seed=SAMPLER_SEED):
        lo, hi = self.aggregate_range()
        k1 = np.ones(self.N)
        if self.gamma is not None:
            # |phi'| is affine in z, so its maximum sits at an endpoint
            k2 = self.gamma * np.maximum(np.abs(self.b - 2 * lo), np.abs(self.b - 2 * hi))
            return KappaBounds(k1, k2, "exact")
        pts = qmc.Halton(d=1, scramble=True, seed=seed).random(KAPPA_SAMPLES)[:, 0]
        k2 = np.array([np.max(np.abs(self._dphi(i, lo[i] + pts * (hi[i] - lo[i])))) for i in range(self.N)])
        return KappaBounds(k1, k2, "sampled")

    def param_vector(self, name):
        if name != "gamma" or self.gamma is None:
            raise KeyError(name)
        return np.array([self.gamma])

    def with_param(self, name, value):
        if name != "gamma" or self.gamma is None:
            raise KeyError(name)
        return RacesGame(self.network, self.a, self.b, gamma=float(np.asarray(value).reshape(-1)[0]))

    def param_jacobian(self, x, name):
        if name != "gamma" or self.gamma is None:
            raise KeyError(name)
        z = self.aggregate(x)[:, 0]
        return (-z * (self.b - z)).reshape(-1, 1)

    def with_network(self, network):
        return RacesGame(network, self.a, self.b, gamma=self.gamma, phi=self._phi, dphi=self._dphi)

    def _identity(self):
        return {"G": self.G, "a": self.a, "b": self.b, "gamma": self.gamma,
                "phi": self._phi, "dphi": self._dphi}


# ---------------------------------------------------------------------------
# user callbacks
# ---------------------------------------------------------------------------

class CustomGame(NetworkGame):
    """Game defined by per-agent callbacks.

    Parameters
    ----------
    network : Network or array_like
    n : int
        Strategy dimension.
    gradient : callable ``(i, x_i, z_i) -> (n,)``
        Own-strategy cost gradient.
    own_hessian : callable ``(i, x_i, z_i) -> (n, n)``
    cross_hessian : callable ``(i, x_i, z_i) -> (n, n)``
    constraints : ConstraintSet or list
    kappa1, kappa2 : array_like, optional
        User-certified curvature bounds; when omitted they are sampled.
    cost : callable ``(i, y, z)``, optional
        Needed only by the brute-force oracle.
    """

    family = "custom"

    def __init__(self, network, n: int, gradient: Callable, own_hessian: Callable,
                 cross_hessian: Callable, constraints=None, kappa1=None, kappa2=None,
                 cost: Optional[Callable] = None, br_tol: float = BR_TOL, br_max_iter: int = 10_000):
        self.network = _as_network(network)
        self.n = int(n)
        self._grad = gradient
        self._own = own_hessian
        self._cross = cross_hessian
        self._cost = cost
        self.constraints = _constraint_list(constraints, self.N, self.n)
        self.kappa1 = None if kappa1 is None else np.broadcast_to(np.asarray(kappa1, float), (self.N,)).copy()
        self.kappa2 = None if kappa2 is None else np.broadcast_to(np.asarray(kappa2, float), (self.N,)).copy()
        self.br_tol = br_tol
        self.br_max_iter = br_max_iter

    def _checked(self, value, shape, what, i):
        arr = np.asarray(value, dtype=float)
        if arr.size != int(np.prod(shape)):
            raise GameValidationError(f"{what} callback for agent {i} returned shape {arr.shape}, expected {shape}")
        return arr.reshape(shape)

    def agent_gradient(self, xb, zb):
        return np.array([self._checked(self._grad(i, xb[i], zb[i]), (self.n,), "gradient", i)
                         for i in range(self.N)])

    def agent_hessians(self, xb, zb):
        D = np.array([self._checked(self._own(i, xb[i], zb[i]), (self.n, self.n), "own_hessian", i)
                      for i in range(self.N)])
        K = np.array([self._checked(self._cross(i, xb[i], zb[i]), (self.n, self.n), "cross_hessian", i)
                      for i in range(self.N)])
        return D, K

    def agent_best_response(self, i, z_i):
        # projected gradient with curvature-scaled steps
        z_i = np.asarray(z_i, dtype=float).reshape(self.n)
        cons = self.constraints[i]
        y = cons.project(np.zeros(self.n))
        for _ in range(self.br_max_iter):
            g = self._checked(self._grad(i, y, z_i), (self.n,), "gradient", i)
            curv = np.linalg.eigvalsh(self._checked(self._own(i, y, z_i), (self.n, self.n), "own_hessian", i))[-1]
            step = 1.0 / max(curv, 1e-12)
            nxt = cons.project(y - step * g)
            if np.linalg.norm(y - cons.project(y - g)) <= self.br_tol and np.linalg.norm(nxt - y) <= self.br_tol:
                return nxt
            y = nxt
        raise RuntimeError(f"best response of agent {i} did not converge")

    def cost(self, i, y, z):
        if self._cost is None:
            raise NotImplementedError("custom game has no cost callback")
        return self._cost(i, y, z)

    def kappa_bounds(self, box=None, seed=SAMPLER_SEED):
        if self.kappa1 is not None and self.kappa2 is not None:
            return KappaBounds(self.kappa1, self.kappa2, "user_supplied")
        if box is None:
            lo, hi = self.box_bounds()
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise GameValidationError("custom game needs kappa bounds or a bounding box")
        else:
            lo, hi = (np.broadcast_to(np.asarray(v, float), (self.dim,)) for v in box)
        pts = qmc.scale(qmc.Halton(d=self.dim, scramble=True, seed=seed).random(KAPPA_SAMPLES), lo, hi) \
            if np.any(hi > lo) else np.tile(lo, (1, 1))
        k1 = np.full(self.N, np.inf)
        k2 = np.zeros(self.N)
        for x in pts:
            jac = self.jacobian(x)
            D, K = jac.D_blocks, jac.K_blocks
            k1 = np.minimum(k1, [np.linalg.eigvalsh(0.5 * (d + d.T))[0] for d in D])
            k2 = np.maximum(k2, [np.linalg.norm(k, 2) for k in K])
        if self.kappa1 is not None:
            k1 = self.kappa1
        if self.kappa2 is not None:
            k2 = self.kappa2
        return KappaBounds(k1, k2, "sampled")

    def with_network(self, network):
        return CustomGame(network, self.n, self._grad, self._own, self._cross, self.constraints,
                          self.kappa1, self.kappa2, self._cost, self.br_tol, self.br_max_iter)

    def _identity(self):
        return {"G": self.G, "n": self.n, "callbacks": (self._grad, self._own, self._cross),
                "constraints": self.constraints}


GameSpec = Union[LinearQuadraticGame, RacesGame, MultiActivityGame, CustomGame]


# ---------------------------------------------------------------------------
# functional interface
# ---------------------------------------------------------------------------

def neighbor_aggregate(spec: NetworkGame, x) -> np.ndarray:
    """Stacked aggregates ``z_i = sum_j G_ij x_j`` as a flat vector."""
    return spec.aggregate(x).reshape(-1)


def evaluate_jacobian(spec: NetworkGame, x) -> JacobianEval:
    return spec.jacobian(x)


def best_response(spec: NetworkGame, i: int, z_i) -> np.ndarray:
    """Minimiser of agent ``i``'s cost over its own set for a fixed aggregate."""
    return spec.agent_best_response(i, np.asarray(z_i, dtype=float).reshape(spec.n))


def kappa_bounds(spec: NetworkGame, strategy_bounds=None, seed: int = SAMPLER_SEED) -> KappaBounds:
    return spec.kappa_bounds(strategy_bounds, seed=seed)
