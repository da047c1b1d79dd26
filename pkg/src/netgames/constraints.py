"""Per-agent convex strategy sets: boxes, orthants and polyhedra."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .qp import InfeasibleQPError, solve_qp

__all__ = ["ConstraintSet", "InfeasibleConstraintError", "UnboundedSetError"]

KINDS = ("box", "nonneg_orthant", "polyhedron", "unconstrained")


class InfeasibleConstraintError(ValueError):
    pass


class UnboundedSetError(ValueError):
    pass


def _ro(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """A closed convex set in ``R^dim``.

    Use the ``box``, ``nonneg``, ``polyhedron`` and ``unconstrained``
    constructors rather than the raw initialiser.
    """

    kind: str
    dim: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    B: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    H: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- constructors -------------------------------------------------
    @classmethod
    def box(cls, lower, upper, dim: Optional[int] = None) -> "ConstraintSet":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        dim = dim or max(lower.size, upper.size)
        lower = np.broadcast_to(lower, (dim,))
        upper = np.broadcast_to(upper, (dim,))
        if np.any(lower > upper):
            k = int(np.flatnonzero(lower > upper)[0])
            raise InfeasibleConstraintError(f"box lower bound exceeds upper bound at coordinate {k}")
        return cls("box", dim, lower=_ro(lower), upper=_ro(upper))

    @classmethod
    def nonneg(cls, dim: int = 1) -> "ConstraintSet":
        return cls("nonneg_orthant", dim, lower=_ro(np.zeros(dim)), upper=_ro(np.full(dim, np.inf)))

    @classmethod
    def unconstrained(cls, dim: int = 1) -> "ConstraintSet":
        return cls("unconstrained", dim, lower=_ro(np.full(dim, -np.inf)), upper=_ro(np.full(dim, np.inf)))

    @classmethod
    def polyhedron(cls, B=None, b=None, H=None, h=None, dim: Optional[int] = None,
                   require_slater: bool = False) -> "ConstraintSet":
        """``{y : B y <= b, H y = h}``; checked for non-emptiness."""
        if dim is None:
            dim = np.atleast_2d(B if B is not None else H).shape[1]
        B = np.zeros((0, dim)) if B is None else np.atleast_2d(np.asarray(B, float))
        b = np.zeros(0) if b is None else np.atleast_1d(np.asarray(b, float))
        H = np.zeros((0, dim)) if H is None else np.atleast_2d(np.asarray(H, float))
        h = np.zeros(0) if h is None else np.atleast_1d(np.asarray(h, float))
        if B.shape != (b.size, dim) or H.shape != (h.size, dim):
            raise ValueError("polyhedron data has inconsistent dimensions")
        cs = cls("polyhedron", dim, B=_ro(B), b=_ro(b), H=_ro(H), h=_ro(h))
        slack = cs.max_slack()
        if slack is None:
            raise InfeasibleConstraintError("polyhedron is empty")
        if require_slater and B.shape[0] and slack <= 0:
            raise InfeasibleConstraintError("polyhedron has no strictly feasible point")
        return cs

    # -- representations ----------------------------------------------
    @property
    def is_box(self) -> bool:
        return self.kind != "polyhedron"

    def inequality_form(self):
        """Return ``(B, b, H, h)`` describing the set; infinite bounds are dropped."""
        if self.kind == "polyhedron":
            return self.B, self.b, self.H, self.h
        eye = np.eye(self.dim)
        lo = np.isfinite(self.lower)
        hi = np.isfinite(self.upper)
        B = np.vstack([-eye[lo], eye[hi]])
        b = np.concatenate([-self.lower[lo], self.upper[hi]])
        return B, b, np.zeros((0, self.dim)), np.zeros(0)

    def max_slack(self) -> Optional[float]:
        """Largest ``t <= 1`` with ``B y + t <= b`` feasible; ``None`` when empty."""
        B, b, H, h = self.inequality_form()
        if B.shape[0] == 0:
            if H.shape[0] == 0:
                return 1.0
            y, *_ = np.linalg.lstsq(H, h, rcond=None)
            return 1.0 if np.allclose(H @ y, h, atol=1e-9) else None
        n = self.dim
        cost = np.zeros(n + 1)
        cost[-1] = -1.0
        A_ub = np.hstack([B, np.ones((B.shape[0], 1))])
        A_eq = np.hstack([H, np.zeros((H.shape[0], 1))]) if H.shape[0] else None
        res = linprog(cost, A_ub=A_ub, b_ub=b, A_eq=A_eq, b_eq=h if H.shape[0] else None,
                      bounds=[(None, None)] * n + [(None, 1.0)], method="highs")
        if res.status != 0:
            return None
        slack = float(res.x[-1])
        return slack if slack >= -1e-9 else None

    def contains(self, y, tol: float = 1e-9) -> bool:
        y = np.asarray(y, dtype=float)
        B, b, H, h = self.inequality_form()
        ok = np.all(B @ y - b <= tol)
        if H.shape[0]:
            ok = ok and np.all(np.abs(H @ y - h) <= tol)
        return bool(ok)

    # -- optimisation -------------------------------------------------
    def minimize_quadratic(self, Q, c) -> np.ndarray:
        """Minimiser of ``0.5 y'Qy + c'y`` over the set."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        c = np.asarray(c, dtype=float).reshape(-1)
        if self.is_box and np.count_nonzero(Q - np.diag(np.diag(Q))) == 0:
            return np.clip(-c / np.diag(Q), self.lower, self.upper)
        B, b, H, h = self.inequality_form()
        warm = self._cache.get("active", ())
        try:
            y, active = solve_qp(Q, c, B, b, H, h, warm_active=warm)
        except InfeasibleQPError as exc:
            raise InfeasibleConstraintError(str(exc)) from exc
        self._cache["active"] = active
        return y

    def project(self, v, Q=None) -> np.ndarray:
        """Projection of ``v`` in the metric ``Q`` (Euclidean when omitted)."""
        v = np.asarray(v, dtype=float).reshape(-1)
        if Q is None:
            if self.is_box:
                return np.clip(v, self.lower, self.upper)
            Q = np.eye(self.dim)
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        return self.minimize_quadratic(Q, -Q @ v)

    # -- geometry -----------------------------------------------------
    def bounding_box(self):
        """Coordinate-wise bounds of the set (possibly infinite)."""
        if self.is_box:
            return np.array(self.lower), np.array(self.upper)
        lo = np.empty(self.dim)
        hi = np.empty(self.dim)
        B, b, H, h = self.inequality_form()
        for k in range(self.dim):
            for sign, out in ((1.0, lo), (-1.0, hi)):
                cost = np.zeros(self.dim)
                cost[k] = sign
                res = linprog(cost, A_ub=B if B.shape[0] else None, b_ub=b if B.shape[0] else None,
                              A_eq=H if H.shape[0] else None, b_eq=h if H.shape[0] else None,
                              bounds=[(None, None)] * self.dim, method="highs")
                if res.status == 3:
                    out[k] = -sign * np.inf
                else:
                    out[k] = res.x[k]
        return lo, hi

    def is_bounded(self) -> bool:
        lo, hi = self.bounding_box()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def vertices(self) -> np.ndarray:
        """Extreme points, by enumerating active constraint subsets."""
        if not self.is_bounded():
            raise UnboundedSetError("set is unbounded")
        B, b, H, h = self.inequality_form()
        p = H.shape[0]
        pts = []
        for rows in combinations(range(B.shape[0]), self.dim - p):
            A = np.vstack([H, B[list(rows)]])
            if np.linalg.matrix_rank(A) < self.dim:
                continue
            y = np.linalg.solve(A, np.concatenate([h, b[list(rows)]]))
            if self.contains(y, 1e-9):
                pts.append(y)
        return np.unique(np.round(np.array(pts), 12), axis=0)

    def max_norm_sq(self) -> float:
        """``max ||y||^2`` over the set; exact since the maximum sits at a vertex."""
        if self.is_box:
            if not self.is_bounded():
                raise UnboundedSetError("set is unbounded")
            return float(np.sum(np.maximum(np.abs(self.lower), np.abs(self.upper)) ** 2))
        if self.dim > 4:
            raise UnboundedSetError("maximum norm over a polyhedron is only computed for dim <= 4")
        v = self.vertices()
        return float(np.max(np.sum(v ** 2, axis=1)))

    # -- comparison / serialisation ----------------------------------
    def to_dict(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}
        if self.kind in ("nonneg_orthant", "unconstrained"):
            return {"kind": self.kind, "dim": self.dim}
        return {"kind": "polyhedron", "B": self.B.tolist(), "b": self.b.tolist(),
                "H": self.H.tolist(), "h": self.h.tolist()}

    def __eq__(self, other):
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        if (self.kind, self.dim) != (other.kind, other.dim):
            return False
        names = ("B", "b", "H", "h") if self.kind == "polyhedron" else ("lower", "upper")
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in names)

    def __hash__(self):
        return hash((self.kind, self.dim))
