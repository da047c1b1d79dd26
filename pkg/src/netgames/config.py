"""JSON run configurations: parsing, validation and re-emission.

A configuration is one JSON document::

    {
      "command": "analyze",
      "game": {
        "family": "linear_quadratic",
        "network": {"kind": "complete", "n": 4, "weight": 1},
        "K": 0.5, "a": 1.0, "constraints": "nonneg"
      },
      "dynamics": {"modes": ["continuous_rk4"], "x0": "default_set"},
      "sweep": {"parameter": "gamma", "start": 0.05, "stop": 1.2, "steps": 60},
      "sensitivity": {"parameter": "a"},
      "output": {"dir": "out"}
    }

Matrices are row-major nested lists and ``null`` stands for an infinite
bound. Parse errors carry the JSON line/column or the dotted field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Optional

import numpy as np

from .constraints import ConstraintSet, InfeasibleConstraintError
from .games import GameValidationError, LinearQuadraticGame, MultiActivityGame, NetworkGame, RacesGame
from .network import NetworkValidationError, make_network
from .solvers import MODES

__all__ = [
    "ConfigError",
    "RunConfig",
    "COMMANDS",
    "FAMILIES",
    "load_config",
    "parse_config",
    "game_from_config",
    "game_to_config",
    "network_from_config",
]

COMMANDS = ("analyze", "solve", "dynamics", "sweep", "sensitivity")
FAMILIES = ("linear_quadratic", "races", "multi_activity")
NETWORK_KEYS = {"kind", "n", "weight", "matrix", "sizes", "degree", "pattern", "leader_weight", "follower_weight"}
GAME_KEYS = {
    "linear_quadratic": {"family", "network", "n", "Q", "K", "a", "constraints"},
    "races": {"family", "network", "a", "b", "gamma"},
    "multi_activity": {"family", "network", "a_A", "a_B", "beta", "delta", "mu", "lower", "upper",
                       "budget_lower", "budget_upper"},
}
SECTIONS = {"command", "game", "dynamics", "solve", "sweep", "sensitivity", "output", "seed", "tol"}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending location."""


@dataclass
class RunConfig:
    game: NetworkGame
    command: Optional[str]
    raw: dict
    sections: dict = field(default_factory=dict)
    out_dir: Optional[str] = None
    seed: Optional[int] = None
    tol: Optional[float] = None

    def section(self, name: str) -> dict:
        return self.sections.get(name) or {}


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _unknown_keys(doc: dict, allowed, path: str):
    extra = sorted(set(doc) - set(allowed))
    if extra:
        _fail(path, f"unknown key(s) {extra}; expected a subset of {sorted(allowed)}")


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        _fail(f"{path}.{key}", "missing required field")
    return doc[key]


def _array(value, path: str, allow_none_as=None):
    """Nested numeric list to float array; ``null`` maps to ``allow_none_as``."""
    def conv(v):
        if v is None and allow_none_as is not None:
            return allow_none_as
        if isinstance(v, list):
            return [conv(u) for u in v]
        if isinstance(v, bool) or not isinstance(v, Real):
            _fail(path, f"expected a number or nested list of numbers, got {v!r}")
        return float(v)
    try:
        return np.array(conv(value), dtype=float)
    except ValueError as exc:  # ragged lists
        _fail(path, f"not a rectangular array ({exc})")


def _scalar(value, path: str, positive=False) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        _fail(path, f"expected a number, got {value!r}")
    if positive and value <= 0:
        _fail(path, f"must be positive, got {value}")
    return float(value)


def _int(value, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}, got {value}")
    return int(value)


def _bound_list(arr: np.ndarray):
    """Float array to JSON-ready nested list with ``None`` for infinities."""
    if arr.ndim == 0:
        v = float(arr)
        return v if np.isfinite(v) else None
    return [_bound_list(a) for a in arr]


# ---------------------------------------------------------------------------
# network and constraints
# ---------------------------------------------------------------------------

def network_from_config(doc, path: str = "game.network"):
    if isinstance(doc, list):
        doc = {"kind": "explicit", "matrix": doc}
    if not isinstance(doc, dict):
        _fail(path, "expected a generator object or a matrix")
    _unknown_keys(doc, NETWORK_KEYS, path)
    kind = _require(doc, "kind", path)
    kw = {k: v for k, v in doc.items() if k != "kind"}
    if "matrix" in kw:
        kw["matrix"] = _array(kw["matrix"], f"{path}.matrix")
    try:
        return make_network(kind, **kw)
    except (NetworkValidationError, ValueError, TypeError) as exc:
        _fail(path, str(exc))


def _constraint_from_config(doc, n: int, path: str) -> ConstraintSet:
    if isinstance(doc, str):
        doc = {"kind": doc}
    if not isinstance(doc, dict):
        _fail(path, "expected a constraint name or object")
    kind = _require(doc, "kind", path)
    try:
        if kind in ("nonneg", "nonneg_orthant"):
            _unknown_keys(doc, {"kind", "dim"}, path)
            return ConstraintSet.nonneg(n)
        if kind == "unconstrained":
            _unknown_keys(doc, {"kind", "dim"}, path)
            return ConstraintSet.unconstrained(n)
        if kind == "box":
            _unknown_keys(doc, {"kind", "lower", "upper"}, path)
            lo = _array(doc.get("lower"), f"{path}.lower", allow_none_as=-np.inf)
            hi = _array(doc.get("upper"), f"{path}.upper", allow_none_as=np.inf)
            return ConstraintSet.box(lo, hi, dim=n)
        if kind == "polyhedron":
            _unknown_keys(doc, {"kind", "B", "b", "H", "h"}, path)
            parts = {k: (_array(doc[k], f"{path}.{k}") if k in doc else None) for k in ("B", "b", "H", "h")}
            return ConstraintSet.polyhedron(**parts, dim=n)
    except (InfeasibleConstraintError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        _fail(path, str(exc))
    _fail(f"{path}.kind", f"unknown constraint kind {kind!r}")


def _constraints_from_config(doc, N: int, n: int, path: str):
    if doc is None:
        return None
    if isinstance(doc, list):
        if len(doc) != N:
            _fail(path, f"expected {N} per-agent constraint sets, got {len(doc)}")
        return [_constraint_from_config(d, n, f"{path}[{i}]") for i, d in enumerate(doc)]
    c = _constraint_from_config(doc, n, path)
    return [c] * N


def _constraint_to_config(c: ConstraintSet):
    if c.kind == "box":
        return {"kind": "box", "lower": _bound_list(c.lower), "upper": _bound_list(c.upper)}
    if c.kind == "nonneg_orthant":
        return {"kind": "nonneg"}
    if c.kind == "unconstrained":
        return {"kind": "unconstrained"}
    out = {"kind": "polyhedron"}
    if c.B.shape[0]:
        out.update(B=c.B.tolist(), b=c.b.tolist())
    if c.H.shape[0]:
        out.update(H=c.H.tolist(), h=c.h.tolist())
    return out


# ---------------------------------------------------------------------------
# games
# ---------------------------------------------------------------------------

def game_from_config(doc, path: str = "game") -> NetworkGame:
    """Build a game from its configuration object."""
    if not isinstance(doc, dict):
        _fail(path, "expected an object")
    family = _require(doc, "family", path)
    if family not in FAMILIES:
        _fail(f"{path}.family", f"unknown family {family!r}; expected one of {list(FAMILIES)}")
    _unknown_keys(doc, GAME_KEYS[family], path)
    net = network_from_config(_require(doc, "network", path), f"{path}.network")
    N = net.n_agents
    try:
        if family == "linear_quadratic":
            n = _int(doc.get("n", 1), f"{path}.n", minimum=1)
            cons = _constraints_from_config(doc.get("constraints"), N, n, f"{path}.constraints")
            return LinearQuadraticGame(net, K=_array(_require(doc, "K", path), f"{path}.K"),
                                       a=_array(_require(doc, "a", path), f"{path}.a"),
                                       Q=_array(doc.get("Q", 1.0), f"{path}.Q"), constraints=cons, n=n)
        if family == "races":
            return RacesGame(net, a=_array(_require(doc, "a", path), f"{path}.a"),
                             b=_array(_require(doc, "b", path), f"{path}.b"),
                             gamma=_scalar(_require(doc, "gamma", path), f"{path}.gamma"))
        bounds = {}
        for key, default in (("lower", 0.0), ("upper", np.inf), ("budget_lower", -np.inf),
                             ("budget_upper", np.inf)):
            fill = -np.inf if key.endswith("lower") else np.inf
            bounds[key] = _array(doc.get(key, default), f"{path}.{key}", allow_none_as=fill)
        return MultiActivityGame(net, a_A=_array(_require(doc, "a_A", path), f"{path}.a_A"),
                                 a_B=_array(_require(doc, "a_B", path), f"{path}.a_B"),
                                 beta=_array(doc.get("beta", 0.0), f"{path}.beta"),
                                 delta=_scalar(_require(doc, "delta", path), f"{path}.delta"),
                                 mu=_scalar(doc.get("mu", 0.0), f"{path}.mu"), **bounds)
    except ConfigError:
        raise
    except (GameValidationError, InfeasibleConstraintError, ValueError) as exc:
        _fail(path, str(exc))


def game_to_config(game: NetworkGame) -> dict:
    """Explicit configuration that re-parses to an equal game."""
    net = {"kind": "explicit", "matrix": game.G.tolist()}
    if isinstance(game, MultiActivityGame):
        return {"family": "multi_activity", "network": net, "a_A": game.a_A.tolist(),
                "a_B": game.a_B.tolist(), "beta": game.beta.tolist(), "delta": game.delta,
                "mu": game.mu, "lower": _bound_list(game.lower), "upper": _bound_list(game.upper),
                "budget_lower": _bound_list(game.budget_lower),
                "budget_upper": _bound_list(game.budget_upper)}
    if isinstance(game, LinearQuadraticGame):
        return {"family": "linear_quadratic", "network": net, "n": game.n, "Q": game.Q.tolist(),
                "K": game.K.tolist(), "a": game.a.tolist(),
                "constraints": [_constraint_to_config(c) for c in game.constraints]}
    if isinstance(game, RacesGame):
        if game.gamma is None:
            raise ConfigError("game: races with callback prize functions cannot be serialised")
        return {"family": "races", "network": net, "a": game.a.tolist(), "b": game.b.tolist(),
                "gamma": game.gamma}
    raise ConfigError(f"game: family {game.family!r} has no configuration form")


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

def _check_dynamics(doc: dict, path: str):
    allowed = {"modes", "mode", "x0", "tau", "h", "step", "max_iters", "max_time", "residual_tol",
               "record_every", "oscillation_tol", "max_period", "adapt_step"}
    _unknown_keys(doc, allowed, path)
    modes = doc.get("modes", doc.get("mode", ["continuous_rk4"]))
    modes = [modes] if isinstance(modes, str) else modes
    if not isinstance(modes, list) or not modes:
        _fail(f"{path}.modes", "expected a non-empty list of mode names")
    for m in modes:
        if m not in MODES:
            _fail(f"{path}.modes", f"unknown mode {m!r}; expected one of {list(MODES)}")


def _check_sweep(doc: dict, path: str):
    _unknown_keys(doc, {"parameter", "edge", "start", "stop", "steps", "grid_resolution", "box", "workers"},
                  path)
    param = _require(doc, "parameter", path)
    if not isinstance(param, str):
        _fail(f"{path}.parameter", "expected a parameter name or 'edge'")
    start = _scalar(_require(doc, "start", path), f"{path}.start")
    stop = _scalar(_require(doc, "stop", path), f"{path}.stop")
    if not (np.isfinite(start) and np.isfinite(stop)):
        _fail(path, "sweep range must be finite")
    _int(_require(doc, "steps", path), f"{path}.steps", minimum=2)
    if param == "edge":
        e = _require(doc, "edge", path)
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            _fail(f"{path}.edge", "expected [i, j] with zero-based agent indices")


def parse_config(doc: dict, source: str = "<config>") -> RunConfig:
    """Validate a decoded configuration document."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object")
    _unknown_keys(doc, SECTIONS, source)
    command = doc.get("command")
    if command is not None and command not in COMMANDS:
        _fail("command", f"unknown command {command!r}; expected one of {list(COMMANDS)}")
    game = game_from_config(_require(doc, "game", source))
    sections = {}
    for name in ("dynamics", "solve", "sweep", "sensitivity"):
        sec = doc.get(name)
        if sec is None:
            continue
        if not isinstance(sec, dict):
            _fail(name, "expected an object")
        sections[name] = sec
    if "dynamics" in sections:
        _check_dynamics(sections["dynamics"], "dynamics")
    if "sweep" in sections:
        _check_sweep(sections["sweep"], "sweep")
    out = doc.get("output") or {}
    if not isinstance(out, dict):
        _fail("output", "expected an object")
    seed = doc.get("seed")
    if seed is not None:
        seed = _int(seed, "seed", minimum=0)
    tol = doc.get("tol")
    if tol is not None:
        tol = _scalar(tol, "tol", positive=True)
    return RunConfig(game=game, command=command, raw=doc, sections=sections, out_dir=out.get("dir"),
                     seed=seed, tol=tol)


def load_config(path: str) -> RunConfig:
    """Read and validate a configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_config(doc, path)


def json_ready(obj: Any):
    """Recursively convert numpy values and enums into JSON-compatible values."""
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_ready(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj
