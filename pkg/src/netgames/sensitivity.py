"""Comparative statics of Nash equilibria.

At a regular equilibrium the active constraints can be frozen to an equality
system ``A x = a`` and the equilibrium moves with a parameter ``y`` as
``d x*/d y = -M grad_y F`` with ``L = (grad_x F)^{-1}`` and
``M = L - L A'(A L A')^{-1} A L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import lsq_linear

from .constraints import UnboundedSetError
from .games import LinearQuadraticGame, NetworkGame

__all__ = [
    "ActiveSetData",
    "RegularityFlags",
    "SensitivityResult",
    "LipschitzBound",
    "NotKKTPointError",
    "RegularityError",
    "kkt_multipliers",
    "check_regularity",
    "equilibrium_sensitivity",
    "lipschitz_bound",
    "lq_lipschitz_constant",
    "ACTIVITY_TOL",
    "STRICT_TOL",
]

ACTIVITY_TOL = 1e-8
STRICT_TOL = 1e-6


class NotKKTPointError(ValueError):
    pass


class RegularityError(ValueError):
    pass


@dataclass
class ActiveSetData:
    A: np.ndarray
    a: np.ndarray
    active_indices: list  # (agent, row) of active inequality rows
    equality_indices: list  # (agent, row) of equality rows
    activity_tol: float
    stationarity_residual: float = 0.0

    @property
    def n_active(self) -> int:
        return len(self.active_indices)


@dataclass
class RegularityFlags:
    second_order: bool
    full_rank: bool
    strict_complementarity: bool
    second_order_margin: float
    rank_margin: float
    complementarity_margin: float
    failing_rows: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return self.second_order and self.full_rank and self.strict_complementarity

    def failures(self) -> list:
        names = []
        if not self.second_order:
            names.append("second-order (positive definite symmetric gradient)")
        if not self.full_rank:
            names.append("full row rank of active constraints")
        if not self.strict_complementarity:
            names.append("strict complementarity")
        return names


@dataclass
class SensitivityResult:
    grad_y_xstar: np.ndarray
    M_matrix: np.ndarray
    L_matrix: np.ndarray
    regularity: RegularityFlags
    active: ActiveSetData
    parameter: str


def _global_rows(spec: NetworkGame):
    """Inequality and equality rows of every agent lifted to the full profile."""
    ineq, ineq_rhs, ineq_idx = [], [], []
    eq, eq_rhs, eq_idx = [], [], []
    n = spec.n
    for i, cons in enumerate(spec.constraints):
        B, b, H, h = cons.inequality_form()
        for k in range(B.shape[0]):
            row = np.zeros(spec.dim)
            row[i * n:(i + 1) * n] = B[k]
            ineq.append(row)
            ineq_rhs.append(b[k])
            ineq_idx.append((i, k))
        for k in range(H.shape[0]):
            row = np.zeros(spec.dim)
            row[i * n:(i + 1) * n] = H[k]
            eq.append(row)
            eq_rhs.append(h[k])
            eq_idx.append((i, k))
    as_mat = lambda rows: np.array(rows).reshape(-1, spec.dim)
    return (as_mat(ineq), np.array(ineq_rhs), ineq_idx, as_mat(eq), np.array(eq_rhs), eq_idx)


def kkt_multipliers(spec: NetworkGame, xstar, activity_tol: float = ACTIVITY_TOL):
    """Multipliers of the equilibrium KKT system ``F + B'lam + H'mu = 0``.

    Returns
    -------
    lam : array
        One entry per inequality row of every agent (zero when inactive).
    mu : array
        One entry per equality row.
    active : ActiveSetData

    Raises
    ------
    NotKKTPointError
        If the stationarity residual exceeds ``100 * activity_tol``.
    """
    x = np.asarray(xstar, dtype=float).reshape(-1)
    B, b, idx, H, h, eq_idx = _global_rows(spec)
    F = spec.F(x)
    act = np.flatnonzero(np.abs(B @ x - b) <= activity_tol) if B.shape[0] else np.zeros(0, int)
    Bact = B[act]
    system = np.vstack([Bact, H]).T  # columns: active rows then equalities
    lam = np.zeros(B.shape[0])
    mu = np.zeros(H.shape[0])
    if system.shape[1]:
        lower = np.concatenate([np.zeros(len(act)), np.full(H.shape[0], -np.inf)])
        sol = lsq_linear(system, -F, bounds=(lower, np.full(system.shape[1], np.inf)),
                         method="bvls", tol=1e-14).x
        lam[act] = sol[:len(act)]
        mu[:] = sol[len(act):]
    resid = float(np.linalg.norm(F + B.T @ lam + H.T @ mu))
    if resid > 100 * activity_tol:
        raise NotKKTPointError(f"not a KKT point: stationarity residual {resid:.3e}")
    data = ActiveSetData(A=np.vstack([Bact, H]), a=np.concatenate([b[act], h]),
                         active_indices=[idx[k] for k in act], equality_indices=list(eq_idx),
                         activity_tol=activity_tol, stationarity_residual=resid)
    return lam, mu, data


def check_regularity(spec: NetworkGame, xstar, lam=None, active: Optional[ActiveSetData] = None,
                     strict_tol: float = STRICT_TOL, eig_tol: float = 1e-10) -> RegularityFlags:
    """Second-order, rank and strict-complementarity conditions at ``xstar``."""
    x = np.asarray(xstar, dtype=float).reshape(-1)
    if lam is None or active is None:
        lam, _, active = kkt_multipliers(spec, x)
    grad = spec.jacobian(x).gradF
    so = float(np.linalg.eigvalsh(0.5 * (grad + grad.T))[0])
    A = active.A
    if A.shape[0]:
        sv = np.linalg.svd(A, compute_uv=False)
        rank_margin = float(sv[-1]) if A.shape[0] <= A.shape[1] else 0.0
    else:
        rank_margin = np.inf
    full_rank = A.shape[0] == 0 or rank_margin > 1e-10 * max(1.0, float(np.linalg.norm(A, 2)))
    B, b, idx, *_ = _global_rows(spec)
    act_rows = [idx.index(p) for p in active.active_indices]
    act_lam = lam[act_rows] if act_rows else np.zeros(0)
    failing = [active.active_indices[k] for k in np.flatnonzero(act_lam <= strict_tol)]
    comp_margin = float(np.min(act_lam)) if act_lam.size else np.inf
    return RegularityFlags(so > eig_tol, bool(full_rank), not failing, so, rank_margin, comp_margin, failing)


def equilibrium_sensitivity(spec: NetworkGame, xstar, parameter: str, columns=None,
                            activity_tol: float = ACTIVITY_TOL, strict_tol: float = STRICT_TOL,
                            require_regular: bool = True) -> SensitivityResult:
    """Jacobian of the equilibrium with respect to a named game parameter.

    Parameters
    ----------
    spec : NetworkGame
    xstar : array_like
        Equilibrium at the nominal parameter.
    parameter : str
        ``"a"`` for linear-quadratic intercepts, ``"gamma"`` for races.
    columns : sequence of int, optional
        Subset of parameter entries to differentiate against.

    Raises
    ------
    RegularityError
        If a regularity condition fails or a required matrix is singular.
    """
    x = np.asarray(xstar, dtype=float).reshape(-1)
    lam, _, active = kkt_multipliers(spec, x, activity_tol)
    flags = check_regularity(spec, x, lam, active, strict_tol)
    if require_regular and not flags.all_pass:
        detail = "; ".join(flags.failures())
        if flags.failing_rows:
            detail += f" (rows {flags.failing_rows})"
        raise RegularityError(f"regularity fails: {detail}")
    grad = spec.jacobian(x).gradF
    try:
        L = np.linalg.solve(grad, np.eye(spec.dim))
    except np.linalg.LinAlgError as exc:
        raise RegularityError("gradient of the game Jacobian is singular") from exc
    A = active.A
    if A.shape[0]:
        S = A @ L @ A.T
        try:
            M = L - L @ A.T @ np.linalg.solve(S, A @ L)
        except np.linalg.LinAlgError as exc:
            raise RegularityError("A L A' is singular") from exc
        # coordinate bounds pin their coordinate exactly
        for row in A:
            nz = np.flatnonzero(row)
            if nz.size == 1:
                M[nz[0], :] = 0.0
                M[:, nz[0]] = 0.0
    else:
        M = L
    dF = spec.param_jacobian(x, parameter)
    if columns is not None:
        dF = dF[:, list(columns)]
    return SensitivityResult(-M @ dF, M, L, flags, active, parameter)


# ---------------------------------------------------------------------------
# Lipschitz bounds
# ---------------------------------------------------------------------------

def lq_lipschitz_constant(spec: LinearQuadraticGame) -> float:
    """Largest ``||[Q_i, K_i, -I]||_2``: gradient Lipschitz constant in ``(x_i, z_i, a_i)``."""
    n = spec.n
    return float(max(np.linalg.norm(np.hstack([spec.Q[i], spec.K[i], -np.eye(n)]), 2)
                     for i in range(spec.N)))


@dataclass(frozen=True)
class LipschitzBound:
    """Perturbation bounds on the equilibrium.

    ``parameter_bound(dy)`` bounds the displacement for a parameter shift of
    norm ``dy``; ``network_bound(dG, dy)`` bounds it for a network change of
    spectral norm ``dG`` together with a parameter shift, on bounded sets.
    """

    eta_bar: float
    L_const: float
    delta_max: Optional[float] = None
    L_source: str = "user"

    @property
    def bound_y(self) -> float:
        return self.L_const / self.eta_bar

    def parameter_bound(self, dy_norm: float) -> float:
        return self.bound_y * float(dy_norm)

    def network_bound(self, dG_norm: float, dy_norm: float = 0.0) -> float:
        if self.delta_max is None:
            raise UnboundedSetError("network perturbation bound needs a bounded strategy set")
        return self.bound_y * float(np.sqrt((dG_norm * self.delta_max) ** 2 + dy_norm ** 2))


def lipschitz_bound(spec: NetworkGame, eta_bar: float, L_const: Optional[float] = None,
                    x_bound: Optional[float] = None) -> LipschitzBound:
    """Assemble Lipschitz bounds from a block-P (or monotonicity) constant.

    ``L_const`` defaults to the closed form for linear-quadratic games and is
    required otherwise. ``x_bound`` overrides ``max ||x||`` over ``X``, which
    is otherwise computed when ``X`` is bounded.
    """
    if eta_bar is None or eta_bar <= 0:
        raise ValueError("eta_bar must be positive")
    source = "user"
    if L_const is None:
        if not isinstance(spec, LinearQuadraticGame):
            raise ValueError("L_const is only computed in closed form for linear-quadratic games")
        L_const = lq_lipschitz_constant(spec)
        source = "closed_form"
    delta = x_bound
    if delta is None:
        try:
            delta = float(np.sqrt(sum(c.max_norm_sq() for c in spec.constraints)))
        except UnboundedSetError:
            delta = None
    return LipschitzBound(float(eta_bar), float(L_const), delta, source)
