"""Equilibrium computation: best-response dynamics, projection and a grid oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.stats import qmc

from .constraints import UnboundedSetError
from .games import NetworkGame, SAMPLER_SEED

__all__ = [
    "DynamicsConfig",
    "Trajectory",
    "EquilibriumReport",
    "BruteForceResult",
    "InfeasibleStartError",
    "StepSizeError",
    "MODES",
    "discrete_br",
    "continuous_br",
    "projection_method",
    "run_dynamics",
    "verify_equilibrium",
    "brute_force_nash",
    "polish_equilibrium",
    "solve",
    "stability_tag",
    "default_initial_conditions",
]

MODES = ("discrete_simultaneous", "discrete_sequential", "discrete_relaxed", "continuous_rk4", "projection")


class InfeasibleStartError(ValueError):
    pass


class StepSizeError(RuntimeError):
    pass


@dataclass(frozen=True)
class DynamicsConfig:
    """Settings shared by all dynamics.

    ``tau`` is the relaxation weight of ``discrete_relaxed``, ``h`` the RK4
    step, ``step`` the projection step. ``max_iters`` counts discrete
    iterations (a sequential iteration is one sweep over all agents) or RK4
    steps; ``max_time`` additionally caps continuous time.
    """

    mode: str = "discrete_simultaneous"
    tau: float = 1.0
    h: float = 0.05
    step: float = 1.0
    max_iters: int = 20_000
    max_time: float = 1e3
    residual_tol: float = 1e-9
    record_every: int = 1
    oscillation_tol: float = 1e-9
    max_period: int = 8
    adapt_step: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown dynamics mode {self.mode!r}")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if self.h <= 0 or self.step <= 0 or self.residual_tol <= 0:
            raise ValueError("h, step and residual_tol must be positive")
        if self.max_iters < 0 or self.record_every < 1:
            raise ValueError("max_iters must be >= 0 and record_every >= 1")


@dataclass
class Trajectory:
    times: np.ndarray
    profiles: np.ndarray
    residuals: np.ndarray
    terminal: str  # converged | max_iters | oscillation_detected
    final_residual: float
    mode: str
    events: list = field(default_factory=list)

    @property
    def x(self) -> np.ndarray:
        return self.profiles[-1]

    @property
    def converged(self) -> bool:
        return self.terminal == "converged"


@dataclass
class EquilibriumReport:
    residual: float
    br_gaps: np.ndarray
    feasible: bool
    is_equilibrium: bool


@dataclass
class BruteForceResult:
    equilibria: np.ndarray
    unpolished: np.ndarray
    n_survivors: int
    grid_resolution: int


class _Recorder:
    def __init__(self, every):
        self.every = every
        self.t, self.x, self.r = [], [], []

    def add(self, k, t, x, r, force=False):
        if force or k % self.every == 0:
            self.t.append(t)
            self.x.append(np.array(x))
            self.r.append(r)

    def build(self, terminal, final_r, mode, events):
        return Trajectory(np.array(self.t, float), np.array(self.x), np.array(self.r, float),
                          terminal, float(final_r), mode, events)


def _check_start(spec: NetworkGame, x0) -> np.ndarray:
    x0 = np.array(x0 if x0 is not None else spec.default_start(), dtype=float).reshape(-1)
    if x0.size != spec.dim:
        raise InfeasibleStartError(f"start has size {x0.size}, expected {spec.dim}")
    if not spec.is_feasible(x0):
        raise InfeasibleStartError("initial profile is not feasible")
    return x0


def _cycle(history, cfg) -> bool:
    x = history[-1]
    if len(history) < 3 or np.max(np.abs(x - history[-2])) <= 10 * cfg.oscillation_tol:
        return False
    for p in range(2, cfg.max_period + 1):
        if len(history) > p and np.max(np.abs(x - history[-1 - p])) <= cfg.oscillation_tol:
            return True
    return False


def discrete_br(spec: NetworkGame, x0=None, cfg: DynamicsConfig = DynamicsConfig()) -> Trajectory:
    """Discrete best-response dynamics.

    ``discrete_simultaneous`` updates every agent from the same profile,
    ``discrete_sequential`` sweeps agents in index order using the freshest
    profile, and ``discrete_relaxed`` moves a fraction ``tau`` towards the
    simultaneous best response.
    """
    x = _check_start(spec, x0)
    mode = cfg.mode if cfg.mode.startswith("discrete") else "discrete_simultaneous"
    tau = cfg.tau if mode == "discrete_relaxed" else 1.0
    rec = _Recorder(cfg.record_every)
    r = spec.natural_residual(x)
    rec.add(0, 0, x, r, force=True)
    history = [x]
    terminal = "converged" if r <= cfg.residual_tol else "max_iters"
    k = 0
    while terminal == "max_iters" and k < cfg.max_iters:
        k += 1
        if mode == "discrete_sequential":
            x = x.copy()
            xb = x.reshape(spec.N, spec.n)
            for i in range(spec.N):
                xb[i] = spec.agent_best_response(i, spec.G[i] @ xb)
        else:
            bx = spec.best_response(x)
            x = bx if tau == 1.0 else (1.0 - tau) * x + tau * bx
        r = spec.natural_residual(x)
        history = (history + [x])[-(cfg.max_period + 2):]
        if r <= cfg.residual_tol:
            terminal = "converged"
        elif _cycle(history, cfg):
            terminal = "oscillation_detected"
        rec.add(k, k, x, r, force=terminal != "max_iters" or k == cfg.max_iters)
    return rec.build(terminal, r, mode, [])


def _rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def continuous_br(spec: NetworkGame, x0=None, cfg: DynamicsConfig = DynamicsConfig(mode="continuous_rk4"),
                  check_lyapunov: bool = False, lyapunov_patience: int = 50) -> Trajectory:
    """Integrate ``dx/dt = B(x) - x`` with classical RK4 at fixed step ``h``.

    Each step is projected back onto ``X`` to remove round-off drift; inside
    ``X`` this is the identity. With ``check_lyapunov`` (meaningful for
    strongly monotone games with projection-form costs) the Lyapunov value is
    monitored and a persistent increase raises :class:`StepSizeError`.
    """
    x = _check_start(spec, x0)
    h = cfg.h
    f = lambda y: spec.best_response(y) - y
    rec = _Recorder(cfg.record_every)

    def gap(y):
        return max(spec.natural_residual(y), float(np.linalg.norm(f(y))))

    r = gap(x)
    rec.add(0, 0.0, x, r, force=True)
    monitor = check_lyapunov and spec.projection_metric() is not None
    lyap = spec.lyapunov(x) if monitor else None
    rises = 0
    steps = min(cfg.max_iters, int(np.ceil(cfg.max_time / h - 1e-9)))
    terminal = "converged" if r <= cfg.residual_tol else "max_iters"
    k = 0
    while terminal != "converged" and k < steps:
        k += 1
        x = spec.project(_rk4_step(f, x, h))
        r = gap(x)
        if monitor:
            new = spec.lyapunov(x)
            if not np.isfinite(new):
                raise StepSizeError(f"Lyapunov value diverged; reduce h={h}")
            rises = rises + 1 if new > lyap + min(10 * h ** 4, 0.1) * max(1.0, abs(lyap)) else 0
            lyap = new
            if rises >= lyapunov_patience:
                raise StepSizeError(f"Lyapunov value increased for {rises} consecutive steps; reduce h={h}")
        if r <= cfg.residual_tol:
            terminal = "converged"
        rec.add(k, k * h, x, r, force=terminal == "converged" or k == steps)
    return rec.build(terminal, r, "continuous_rk4", [])


def projection_method(spec: NetworkGame, x0=None, cfg: DynamicsConfig = DynamicsConfig(mode="projection"),
                      patience: int = 10) -> Trajectory:
    """Iterate ``x <- Pi_X[x - step F(x)]`` with Euclidean projection.

    When ``adapt_step`` is set and the residual grows for ``patience``
    consecutive iterations the step is halved; each halving is recorded in
    ``events`` as ``(iteration, new_step)``.
    """
    x = _check_start(spec, x0)
    step = cfg.step
    rec = _Recorder(cfg.record_every)
    r = spec.natural_residual(x)
    rec.add(0, 0, x, r, force=True)
    history = [x]
    events = []
    rises = 0
    terminal = "converged" if r <= cfg.residual_tol else "max_iters"
    k = 0
    while terminal == "max_iters" and k < cfg.max_iters:
        k += 1
        x = spec.project(x - step * spec.F(x))
        new_r = spec.natural_residual(x)
        rises = rises + 1 if new_r > r else 0
        r = new_r
        history = (history + [x])[-(cfg.max_period + 2):]
        if r <= cfg.residual_tol:
            terminal = "converged"
        elif _cycle(history, cfg):
            terminal = "oscillation_detected"
        elif cfg.adapt_step and rises >= patience:
            step *= 0.5
            rises = 0
            events.append((k, step))
        rec.add(k, k, x, r, force=terminal != "max_iters" or k == cfg.max_iters)
    return rec.build(terminal, r, "projection", events)


def run_dynamics(spec: NetworkGame, x0=None, cfg: DynamicsConfig = DynamicsConfig()) -> Trajectory:
    if cfg.mode == "continuous_rk4":
        return continuous_br(spec, x0, cfg)
    if cfg.mode == "projection":
        return projection_method(spec, x0, cfg)
    return discrete_br(spec, x0, cfg)


def verify_equilibrium(spec: NetworkGame, x, eps: float = 1e-9) -> EquilibriumReport:
    """Natural residual and per-agent best-response gaps at ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    zb = spec.aggregate(x)
    xb = x.reshape(spec.N, spec.n)
    gaps = np.array([np.linalg.norm(xb[i] - spec.agent_best_response(i, zb[i])) for i in range(spec.N)])
    feasible = spec.is_feasible(x)
    return EquilibriumReport(spec.natural_residual(x), gaps, feasible,
                             bool(feasible and np.all(gaps <= eps)))


# ---------------------------------------------------------------------------
# local refinement and stability
# ---------------------------------------------------------------------------

def polish_equilibrium(spec: NetworkGame, x, tol: float = 1e-12, max_newton: int = 50,
                       br_iters: int = 500) -> Optional[np.ndarray]:
    """Refine an approximate equilibrium; returns ``None`` on failure.

    On box-constrained games a semismooth Newton method is applied to the
    natural residual, which also converges to equilibria that are unstable
    under best-response dynamics. Otherwise, or if Newton stalls, sequential
    best-response sweeps are used.
    """
    x = np.asarray(x, dtype=float).copy()
    if all(c.is_box for c in spec.constraints):
        lo, hi = spec.box_bounds()
        y = np.clip(x, lo, hi)
        res = lambda v: v - np.clip(v - spec.F(v), lo, hi)
        R = res(y)
        for _ in range(max_newton):
            nr = np.linalg.norm(R)
            if nr <= tol:
                return y
            jac = spec.jacobian(y).gradF
            w = y - spec.F(y)
            free = (w > lo) & (w < hi)
            J = np.eye(spec.dim)
            J[free] = jac[free]
            try:
                d = np.linalg.solve(J, -R)
            except np.linalg.LinAlgError:
                break
            t = 1.0
            while t > 1e-6:
                cand = np.clip(y + t * d, lo, hi)
                Rc = res(cand)
                if np.linalg.norm(Rc) < (1 - 1e-4 * t) * nr:
                    break
                t *= 0.5
            else:
                break
            y, R = cand, Rc
        if np.linalg.norm(res(y)) <= tol:
            return y
    cfg = DynamicsConfig(mode="discrete_sequential", max_iters=br_iters, residual_tol=tol)
    try:
        traj = discrete_br(spec, spec.project(x), cfg)
    except InfeasibleStartError:
        return None
    return traj.x if traj.converged else None


def stability_tag(spec: NetworkGame, x, tol: float = 1e-9) -> str:
    """Local stability of ``x`` under continuous best-response dynamics.

    Coordinates pinned at a bound with a non-zero gradient stay pinned
    nearby; the others follow ``de/dt = -Q^{-1} grad F e``. Coordinates at a
    bound with zero gradient may either stay or leave, so both linearisations
    are examined and must agree. Returns ``stable``, ``unstable``,
    ``degenerate`` or ``unknown`` (non-box sets or general costs).
    """
    if not all(c.is_box for c in spec.constraints) or spec.projection_metric() is None:
        return "unknown"
    x = np.asarray(x, dtype=float)
    lo, hi = spec.box_bounds()
    F = spec.F(x)
    at_bound = (np.abs(x - lo) <= tol) | (np.abs(x - hi) <= tol)
    weak = at_bound & (np.abs(F) <= tol)
    Q = spec.projection_metric()
    Qfull = np.zeros((spec.dim, spec.dim))
    for i in range(spec.N):
        Qfull[i * spec.n:(i + 1) * spec.n, i * spec.n:(i + 1) * spec.n] = Q[i]
    M = -np.linalg.solve(Qfull, spec.jacobian(x).gradF)

    def tag(free):
        if not np.any(free):
            return "stable"
        top = np.max(np.linalg.eigvals(M[np.ix_(free, free)]).real)
        return "stable" if top < -tol else "unstable" if top > tol else "degenerate"

    tags = {tag(~at_bound), tag(~at_bound | weak)}
    return tags.pop() if len(tags) == 1 else "degenerate"


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def brute_force_nash(spec: NetworkGame, grid_resolution: int, box=None, dedupe_tol: float = 1e-6,
                     eq_tol: float = 1e-10, max_profiles: float = 1e8) -> BruteForceResult:
    """Find all equilibria of a small box-constrained game by grid enumeration.

    Every coordinate is discretised with ``grid_resolution`` points. A grid
    profile survives when each agent's grid strategy lies within the
    grid-induced distance of its exact best response:
    ``sqrt(n) h/2 (1 + kappa2_i/kappa1_i sum_j G_ij)``, which the grid point
    nearest any true equilibrium always satisfies. Survivors are polished
    (see :func:`polish_equilibrium`) and deduplicated.

    Parameters
    ----------
    spec : NetworkGame
    grid_resolution : int
    box : pair of arrays, optional
        Search box used instead of ``X`` (required when ``X`` is unbounded).
    dedupe_tol : float
        Equilibria closer than this in max-norm are merged.
    eq_tol : float
        Residual that a polished survivor must reach.
    """
    if not all(c.is_box for c in spec.constraints):
        raise ValueError("brute-force oracle needs box constraint sets")
    lo, hi = spec.box_bounds()
    if box is not None:
        blo, bhi = (np.broadcast_to(np.asarray(v, float), (spec.dim,)) for v in box)
        lo, hi = np.maximum(lo, blo), np.minimum(hi, bhi)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise UnboundedSetError("brute-force oracle needs a bounded box; pass box=")
    r = int(grid_resolution)
    if r < 2 or float(r) ** spec.dim > max_profiles:
        raise ValueError(f"grid of {r}^{spec.dim} profiles exceeds the limit {max_profiles:g}")
    N, n = spec.N, spec.n
    grids = [np.linspace(lo[c], hi[c], r) for c in range(spec.dim)]
    spacing = np.max((hi - lo) / (r - 1))
    kb = spec.kappa_bounds()
    ratio = kb.kappa2_per_agent / kb.kappa1_per_agent
    reach = np.sqrt(n) * 0.5 * spacing * (1 + ratio * spec.G.sum(axis=1)) * (1 + 1e-9) + 1e-12

    keep = np.ones((r,) * spec.dim, dtype=bool)
    for i in range(N):
        own = list(range(i * n, (i + 1) * n))
        others = [c for c in range(spec.dim) if c not in own]
        # best response depends only on the other agents' grid coordinates
        combos = itertools.product(*(range(r) for _ in others))
        br = np.empty((r,) * len(others) + (n,))
        for idx in combos:
            xo = np.zeros(spec.dim)
            for c, k in zip(others, idx):
                xo[c] = grids[c][k]
            z = spec.G[i] @ xo.reshape(N, n)
            br[idx] = spec.agent_best_response(i, z)
        own_vals = np.stack(np.meshgrid(*(grids[c] for c in own), indexing="ij"), axis=-1)
        # align axes: others' axes first, own axes last
        dist = np.linalg.norm(br.reshape(br.shape[:-1] + (1,) * n + (n,)) - own_vals, axis=-1)
        order = others + own
        dist = np.transpose(dist, np.argsort(order))
        keep &= dist <= reach[i]

    idx = np.argwhere(keep)
    survivors = np.array([[grids[c][k] for c, k in enumerate(row)] for row in idx]).reshape(-1, spec.dim)
    found: List[np.ndarray] = []
    failed: List[np.ndarray] = []
    for s in survivors:
        y = polish_equilibrium(spec, s, tol=eq_tol)
        if y is None or spec.natural_residual(y) > eq_tol:
            failed.append(s)
            continue
        if not any(np.max(np.abs(y - e)) <= dedupe_tol for e in found):
            found.append(y)
    found.sort(key=lambda v: tuple(np.round(v, 9)))
    return BruteForceResult(np.array(found).reshape(-1, spec.dim), np.array(failed).reshape(-1, spec.dim),
                            len(survivors), r)


# ---------------------------------------------------------------------------
# convenience
# ---------------------------------------------------------------------------

def default_initial_conditions(spec: NetworkGame, count: int = 5) -> List[np.ndarray]:
    """Five deterministic feasible starts spread over the strategy set.

    Infinite bounds are replaced by a window of width 2 next to the finite
    bound (or around 0). The raw points are the low corner, the high corner,
    an alternating corner, an increasing ramp and a Halton point; each is
    projected onto ``X``.
    """
    lo, hi = spec.box_bounds()
    lo = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi - 2.0, -1.0))
    hi = np.where(np.isfinite(hi), hi, lo + 2.0)
    d = spec.dim
    fracs = [np.zeros(d), np.ones(d), (np.arange(d) % 2 == 0).astype(float),
             np.linspace(0.1, 0.9, d) if d > 1 else np.array([0.5]),
             qmc.Halton(d=d, scramble=True, seed=SAMPLER_SEED).random(1)[0]]
    return [spec.project(lo + f * (hi - lo)) for f in fracs[:count]]


def solve(spec: NetworkGame, x0=None, tol: float = 1e-9, max_iters: int = 20_000) -> Trajectory:
    """Compute one equilibrium, trying sequential BR, continuous BR, then projection."""
    x0 = _check_start(spec, x0)
    last = None
    for cfg in (DynamicsConfig(mode="discrete_sequential", residual_tol=tol, max_iters=max_iters),
                DynamicsConfig(mode="continuous_rk4", residual_tol=tol, max_iters=max_iters),
                DynamicsConfig(mode="projection", step=0.5, residual_tol=tol, max_iters=max_iters)):
        try:
            last = run_dynamics(spec, x0, cfg)
        except StepSizeError:
            continue
        if last.converged:
            return last
    return last
