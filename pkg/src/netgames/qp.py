"""Small dense convex quadratic programs.

Solves ``min 0.5 y'Qy + c'y  s.t.  B y <= b,  H y = h`` with ``Q`` symmetric
positive definite. The minimiser is unique, so any KKT point is the answer.
"""

from __future__ import annotations

from itertools import combinations
from typing import Optional, Sequence

import numpy as np

__all__ = ["solve_qp", "QPError", "InfeasibleQPError", "kkt_solve"]

EXACT_DIM = 4
ENUMERATION_CAP = 50_000


class QPError(RuntimeError):
    pass


class InfeasibleQPError(QPError):
    pass


def _empty(n):
    return np.zeros((0, n)), np.zeros(0)


def kkt_solve(Q, c, A, rhs):
    """Minimise the quadratic subject to ``A y = rhs``; returns (y, multipliers) or None."""
    n = Q.shape[0]
    m = A.shape[0]
    if m == 0:
        return np.linalg.solve(Q, -c), np.zeros(0)
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = Q
    kkt[:n, n:] = A.T
    kkt[n:, :n] = A
    if np.linalg.matrix_rank(A) < m:
        return None
    sol = np.linalg.solve(kkt, np.concatenate([-c, rhs]))
    return sol[:n], sol[n:]


def _check(Q, c, B, b, H, h, y, lam_active, active, tol):
    if B.shape[0] and np.any(B @ y - b > tol * (1.0 + np.abs(b))):
        return False
    if H.shape[0] and np.any(np.abs(H @ y - h) > tol * (1.0 + np.abs(h))):
        return False
    if lam_active.size and np.any(lam_active < -tol):
        return False
    return True


def _enumerate(Q, c, B, b, H, h, tol, first: Sequence[int] = ()):
    n = Q.shape[0]
    m = B.shape[0]
    p = H.shape[0]
    candidates = []
    if first:
        candidates.append(tuple(first))

    def subsets():
        yield from candidates
        for k in range(0, min(m, n - p if p <= n else 0) + 1):
            yield from combinations(range(m), k)

    for active in subsets():
        A = np.vstack([H, B[list(active)]]) if active else H
        rhs = np.concatenate([h, b[list(active)]]) if active else h
        out = kkt_solve(Q, c, A, rhs)
        if out is None:
            continue
        y, mult = out
        lam = mult[p:]
        if _check(Q, c, B, b, H, h, y, lam, active, tol):
            return y, tuple(active)
    return None


def _dual_gradient(Q, c, B, b, H, h, tol, max_iter=20_000):
    # accelerated projected gradient on the Lagrange dual; multipliers on
    # inequalities are projected onto the non-negative orthant
    A = np.vstack([B, H])
    rhs = np.concatenate([b, h])
    m = B.shape[0]
    Qinv = np.linalg.inv(Q)
    lip = np.linalg.norm(A @ Qinv @ A.T, 2)
    if lip == 0:
        return np.linalg.solve(Q, -c), ()
    step = 1.0 / lip
    nu = np.zeros(A.shape[0])
    prev = nu.copy()
    t = 1.0
    y = -Qinv @ c
    for _ in range(max_iter):
        t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        w = nu + ((t - 1) / t_next) * (nu - prev)
        y = -Qinv @ (c + A.T @ w)
        nxt = w + step * (A @ y - rhs)
        nxt[:m] = np.maximum(nxt[:m], 0.0)
        prev, nu, t = nu, nxt, t_next
        if np.linalg.norm(nu - prev) <= tol * (1 + np.linalg.norm(nu)):
            break
    y = -Qinv @ (c + A.T @ nu)
    slack = b - B @ y if m else np.zeros(0)
    guess = tuple(int(k) for k in np.flatnonzero((nu[:m] > tol) | (slack < 1e-7)))
    return y, guess


def solve_qp(Q, c, B=None, b=None, H=None, h=None, tol: float = 1e-10,
             warm_active: Sequence[int] = ()):
    """Return ``(y, active)`` for the convex QP.

    Parameters
    ----------
    Q : (n, n) array
        Symmetric positive definite.
    c : (n,) array
    B, b : inequality data ``B y <= b`` (optional).
    H, h : equality data ``H y = h`` (optional).
    tol : float
        Feasibility and multiplier-sign tolerance of the KKT check.
    warm_active : sequence of int
        Inequality rows tried first as the active set.

    Notes
    -----
    For ``n <= 4`` candidate active sets are enumerated exhaustively, which
    is exact. Larger problems run an accelerated dual projected gradient and
    then polish the identified active set by an equality-constrained solve;
    enumeration is the fallback if the polish fails the KKT check.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    c = np.asarray(c, dtype=float).reshape(-1)
    n = Q.shape[0]
    B, b = (_empty(n) if B is None else (np.atleast_2d(np.asarray(B, float)), np.asarray(b, float).reshape(-1)))
    H, h = (_empty(n) if H is None else (np.atleast_2d(np.asarray(H, float)), np.asarray(h, float).reshape(-1)))
    if B.size == 0:
        B, b = _empty(n)
    if H.size == 0:
        H, h = _empty(n)

    if n > EXACT_DIM:
        for active in (tuple(warm_active), None):
            if active is None:
                y, active = _dual_gradient(Q, c, B, b, H, h, tol)
            polished = _try(Q, c, B, b, H, h, active, 1e-9)
            if polished is not None:
                return polished
        if _n_subsets(n, B.shape[0]) <= ENUMERATION_CAP:
            found = _enumerate(Q, c, B, b, H, h, 1e-9)
            if found is not None:
                return found
        if np.all(B @ y - b <= 1e-7) and np.all(np.abs(H @ y - h) <= 1e-7):
            return y, active
        raise InfeasibleQPError("constraint set appears infeasible")
    found = _enumerate(Q, c, B, b, H, h, tol, first=warm_active)
    if found is None:
        found = _enumerate(Q, c, B, b, H, h, 1e-7)
    if found is None:
        raise InfeasibleQPError("constraint set is infeasible")
    return found


def _try(Q, c, B, b, H, h, active, tol) -> Optional[tuple]:
    p = H.shape[0]
    A = np.vstack([H, B[list(active)]])
    out = kkt_solve(Q, c, A, np.concatenate([h, b[list(active)]]))
    if out is None:
        return None
    y, mult = out
    if _check(Q, c, B, b, H, h, y, mult[p:], active, tol):
        return y, tuple(active)
    return None


def _n_subsets(n, m):
    from math import comb
    return sum(comb(m, k) for k in range(min(n, m) + 1))
