"""Command-line front end: ``netgames <command> --config run.json --out DIR``.

Commands
--------
analyze      certificate report (JSON)
solve        one equilibrium, optionally all equilibria by grid search (CSV + JSON)
dynamics     best-response trajectories, one CSV per mode and start (+ JSON sidecar)
sweep        equilibria against a scalar parameter or an edge weight (CSV + JSON)
sensitivity  equilibrium Jacobian with respect to a parameter (CSV + JSON)

Exit codes are 0 on success, 2 for configuration errors, 3 for numerical or
regularity failures and 4 when an equilibrium computation does not converge.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from .config import (ConfigError, GAME_KEYS, RunConfig, game_from_config, json_ready, load_config,
                     parse_config)
from .constraints import UnboundedSetError
from .diagnostics import CertificateReport, Verdict, certify
from .games import LinearQuadraticGame, NetworkGame, SAMPLER_SEED
from .qp import QPError
from .sensitivity import (NotKKTPointError, RegularityError, equilibrium_sensitivity, lipschitz_bound)
from . import solvers
from .solvers import (DynamicsConfig, InfeasibleStartError, StepSizeError, brute_force_nash,
                      default_initial_conditions, polish_equilibrium, solve, stability_tag, verify_equilibrium)

__all__ = [
    "main",
    "run_analyze",
    "run_solve",
    "run_dynamics",
    "run_sweep",
    "run_sensitivity",
    "report_to_dict",
    "write_csv",
    "NonConvergenceError",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_NUMERICAL",
    "EXIT_NONCONVERGENCE",
]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_NONCONVERGENCE = 0, 2, 3, 4
DEFAULT_TOL = 1e-9
POLISH_TOL = 1e-13


class NonConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path: str, header, rows) -> None:
    """Comma-separated values with a header row and 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: str, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(json_ready(doc), fh, indent=2, sort_keys=False)
        fh.write("\n")


def strategy_labels(game: NetworkGame):
    return [f"x_{i + 1}_{k + 1}" for i in range(game.N) for k in range(game.n)]


def _ensure_dir(out_dir: Optional[str]) -> Optional[str]:
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    return out_dir


def _as_config(config) -> RunConfig:
    return config if isinstance(config, RunConfig) else parse_config(config)


def _tol(cfg: RunConfig, default: float = DEFAULT_TOL) -> float:
    return cfg.tol if cfg.tol is not None else default


def _start(game: NetworkGame, value, path: str):
    """Initial conditions from a config entry; returns a list of profiles."""
    if value is None or value == "default":
        return [game.default_start()]
    if value == "default_set":
        return default_initial_conditions(game)
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != game.dim:
        raise ConfigError(f"{path}: expected profile(s) of length {game.dim}")
    return list(arr)


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _verdict_dict(v: Verdict) -> dict:
    return {"status": v.status, "route": v.route.value if v.route else None, "constant": v.constant,
            "witness": v.witness, "detail": v.detail, "data": v.data}


def report_to_dict(rep: CertificateReport) -> dict:
    """Structured form of a certificate report."""
    m = rep.margins
    margins = {name: {"value": getattr(m, name), "sign": m.sign(name)}
               for name in ("alpha_2", "alpha_inf", "alpha_min")}
    margins["uncertainty"] = m.uncertainty
    return {
        "spectral": {"spectral_norm": rep.spectral.spectral_norm,
                     "infinity_norm": rep.spectral.infinity_norm,
                     "min_eigenvalue": rep.spectral.min_eigenvalue,
                     "symmetric": rep.spectral.is_symmetric},
        "kappa": {"kappa1": rep.kappa.kappa1, "kappa2": rep.kappa.kappa2,
                  "kappa1_per_agent": rep.kappa.kappa1_per_agent,
                  "kappa2_per_agent": rep.kappa.kappa2_per_agent, "exactness": rep.kappa.exactness},
        "margins": margins,
        "verdicts": {"strong_monotone": _verdict_dict(rep.strong_monotone),
                     "p_upsilon": _verdict_dict(rep.p_upsilon),
                     "uniform_p": _verdict_dict(rep.uniform_p),
                     "potential": _verdict_dict(rep.potential)},
        "guarantees": [{"conclusion": g.conclusion.value, "tag": g.route.value, "detail": g.detail}
                       for g in rep.guarantees],
        "warnings": rep.warnings,
    }


def run_analyze(config, out_dir: Optional[str] = None, seed: Optional[int] = None) -> dict:
    """Certificate report for the configured game; writes ``analyze.json``."""
    cfg = _as_config(config)
    seed = seed if seed is not None else (cfg.seed if cfg.seed is not None else SAMPLER_SEED)
    doc = report_to_dict(certify(cfg.game, seed=seed))
    doc["family"] = cfg.game.family
    if _ensure_dir(out_dir):
        _write_json(os.path.join(out_dir, "analyze.json"), doc)
    return doc


def _print_analyze(doc: dict) -> None:
    sp = doc["spectral"]
    print(f"family: {doc['family']}")
    print(f"||G||_2 = {sp['spectral_norm']:.6g}  ||G||_inf = {sp['infinity_norm']:.6g}  "
          f"lambda_min = {sp['min_eigenvalue'] if sp['min_eigenvalue'] is None else format(sp['min_eigenvalue'], '.6g')}")
    print(f"kappa1 = {doc['kappa']['kappa1']:.6g}  kappa2 = {doc['kappa']['kappa2']:.6g}  "
          f"({doc['kappa']['exactness']})")
    for name in ("alpha_2", "alpha_inf", "alpha_min"):
        v = doc["margins"][name]["value"]
        if v is not None:
            print(f"{name} = {v:.6g} +/- {doc['margins']['uncertainty']:.1e}")
    for name, v in doc["verdicts"].items():
        route = f" [{v['route']}]" if v["route"] else ""
        print(f"{name}: {v['status']}{route}")
    for g in doc["guarantees"]:
        print(f"guarantee: {g['conclusion']} [{g['tag']}]")
    for w in doc["warnings"]:
        print(f"warning: {w['message']}")


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _solve_one(game: NetworkGame, x0, tol: float, max_iters: int = 20_000):
    traj = solve(game, x0, tol=tol, max_iters=max_iters)
    if traj is None or not traj.converged:
        r = np.inf if traj is None else traj.final_residual
        raise NonConvergenceError(f"no solver reached residual {tol:g} (best {r:.3e})")
    x = traj.x
    refined = polish_equilibrium(game, x, tol=POLISH_TOL)
    if refined is not None and game.natural_residual(refined) <= game.natural_residual(x):
        x = refined
    return x, traj


def run_solve(config, out_dir: Optional[str] = None, tol: Optional[float] = None) -> dict:
    """Compute an equilibrium; with ``solve.brute_force`` also list all equilibria."""
    cfg = _as_config(config)
    game = cfg.game
    tol = tol if tol is not None else _tol(cfg)
    sec = cfg.section("solve")
    x0 = _start(game, sec.get("x0"), "solve.x0")[0]
    x, traj = _solve_one(game, x0, tol, int(sec.get("max_iters", 20_000)))
    rep = verify_equilibrium(game, x, eps=max(tol, 1e-9))
    doc = {"mode": traj.mode, "iterations": len(traj.times) - 1, "equilibrium": x,
           "residual": game.natural_residual(x), "br_gaps": rep.br_gaps, "stability": stability_tag(game, x)}
    bf = sec.get("brute_force")
    if bf is not None:
        box = bf.get("box")
        res = brute_force_nash(game, int(bf.get("grid_resolution", 100)), box=box, eq_tol=min(tol, 1e-10))
        doc["all_equilibria"] = [{"x": e, "stability": stability_tag(game, e)} for e in res.equilibria]
    if _ensure_dir(out_dir):
        labels = strategy_labels(game)
        write_csv(os.path.join(out_dir, "equilibrium.csv"), labels + ["residual"],
                  [list(x) + [doc["residual"]]])
        if bf is not None:
            write_csv(os.path.join(out_dir, "equilibria.csv"), ["equilibrium_index"] + labels + ["stability"],
                      [[k] + list(e["x"]) + [e["stability"]] for k, e in enumerate(doc["all_equilibria"])])
        _write_json(os.path.join(out_dir, "solve.json"), doc)
    return doc


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

DYN_FIELDS = ("tau", "h", "step", "max_iters", "max_time", "residual_tol", "record_every", "oscillation_tol",
              "max_period", "adapt_step")


def run_dynamics(config, out_dir: Optional[str] = None, tol: Optional[float] = None) -> list:
    """Trajectories for every requested mode and start.

    Each run writes ``dynamics_<mode>[_<start>].csv`` with columns
    ``step_or_time, x_i_k..., residual`` and a JSON sidecar of the same stem
    holding the terminal status. Returns the sidecar documents.
    """
    cfg = _as_config(config)
    game = cfg.game
    sec = cfg.section("dynamics")
    modes = sec.get("modes", sec.get("mode", ["continuous_rk4"]))
    modes = [modes] if isinstance(modes, str) else list(modes)
    settings = {k: sec[k] for k in DYN_FIELDS if k in sec}
    tol = tol if tol is not None else cfg.tol
    if tol is not None:
        settings["residual_tol"] = tol
    starts = _start(game, sec.get("x0"), "dynamics.x0")
    for j, s in enumerate(starts):
        if not game.is_feasible(s):
            raise InfeasibleStartError(f"dynamics.x0: start {j} is not in the strategy set")
    _ensure_dir(out_dir)
    labels = strategy_labels(game)
    results = []
    for mode in modes:
        try:
            dcfg = DynamicsConfig(mode=mode, **settings)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"dynamics: {exc}") from exc
        for j, x0 in enumerate(starts):
            traj = solvers.run_dynamics(game, x0, dcfg)
            stem = f"dynamics_{mode}" + (f"_{j}" if len(starts) > 1 else "")
            side = {"mode": mode, "start_index": j, "x0": x0, "terminal": traj.terminal,
                    "converged": traj.converged, "final_residual": traj.final_residual,
                    "rows": len(traj.times), "final_profile": traj.x, "events": traj.events,
                    "csv": stem + ".csv"}
            if out_dir is not None:
                rows = [[t] + list(x) + [r] for t, x, r in zip(traj.times, traj.profiles, traj.residuals)]
                write_csv(os.path.join(out_dir, stem + ".csv"), ["step_or_time"] + labels + ["residual"], rows)
                _write_json(os.path.join(out_dir, stem + ".json"), side)
            side["trajectory"] = traj
            results.append(side)
    return results


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_game_factory(cfg: RunConfig, sec: dict):
    param = sec["parameter"]
    if param == "edge":
        i, j = sec["edge"]
        base = cfg.game
        if not (0 <= i < base.N and 0 <= j < base.N) or i == j:
            raise ConfigError(f"sweep.edge: ({i}, {j}) is not an off-diagonal entry of a {base.N}-agent network")
        return lambda v: base.with_network(base.network.with_weight(i, j, v))
    raw = cfg.raw["game"]
    family = raw["family"]
    if param in ("family", "network") or param not in GAME_KEYS[family]:
        raise ConfigError(f"sweep.parameter: {param!r} is not a parameter of the {family} family")
    current = raw.get(param)
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise ConfigError(f"sweep.parameter: {param!r} is not a scalar in the game configuration")

    def build(v):
        doc = copy.deepcopy(raw)
        doc[param] = float(v)
        return game_from_config(doc)
    return build


def _sweep_point(game: NetworkGame, resolution: int, box, eq_tol: float):
    res = brute_force_nash(game, resolution, box=box, eq_tol=eq_tol)
    return [(e, float(np.sum(e)), stability_tag(game, e)) for e in res.equilibria]


def run_sweep(config, out_dir: Optional[str] = None, tol: Optional[float] = None, workers: Optional[int] = None):
    """All equilibria along a one-parameter sweep.

    Writes ``sweep.csv`` with one row per (sweep point, equilibrium), ordered
    by sweep index, and ``sweep.json`` with the equilibrium count per point.
    Returns ``(values, points)`` where ``points[k]`` lists
    ``(profile, total_effort, stability)`` triples.
    """
    cfg = _as_config(config)
    sec = cfg.section("sweep")
    if not sec:
        raise ConfigError("sweep: section missing")
    build = _sweep_game_factory(cfg, sec)
    values = np.linspace(float(sec["start"]), float(sec["stop"]), int(sec["steps"]))
    resolution = int(sec.get("grid_resolution", 200))
    box = sec.get("box")
    eq_tol = min(tol if tol is not None else _tol(cfg, 1e-10), 1e-10)
    workers = workers or int(sec.get("workers", 1))
    games = [build(v) for v in values]
    task = lambda g: _sweep_point(g, resolution, box, eq_tol)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(task, games))  # map keeps sweep order
    else:
        points = [task(g) for g in games]
    if _ensure_dir(out_dir):
        name = sec["parameter"] if sec["parameter"] != "edge" else "edge_weight"
        labels = strategy_labels(games[0])
        rows = []
        for k, (v, pts) in enumerate(zip(values, points)):
            if not pts:
                rows.append([k, v, 0, -1] + [np.nan] * len(labels) + [np.nan, "none"])
            for m, (x, total, tag) in enumerate(pts):
                rows.append([k, v, len(pts), m] + list(x) + [total, tag])
        write_csv(os.path.join(out_dir, "sweep.csv"),
                  ["sweep_index", name, "n_equilibria", "equilibrium_index"] + labels + ["total_effort", "stability"],
                  rows)
        _write_json(os.path.join(out_dir, "sweep.json"),
                    {"parameter": sec["parameter"], "edge": sec.get("edge"), "values": values,
                     "n_equilibria": [len(p) for p in points], "grid_resolution": resolution})
    return values, points


# ---------------------------------------------------------------------------
# sensitivity
# ---------------------------------------------------------------------------

def _finite_difference(game: NetworkGame, x, parameter: str, columns, step: float, tol: float):
    y = game.param_vector(parameter)
    cols = []
    for c in columns:
        pair = []
        for sgn in (1.0, -1.0):
            yp = y.copy()
            yp[c] += sgn * step
            xp, _ = _solve_one(game.with_param(parameter, yp), x, tol)
            pair.append(xp)
        cols.append((pair[0] - pair[1]) / (2 * step))
    return np.column_stack(cols)


def _lipschitz_section(game: NetworkGame, sec: dict, seed: int) -> Optional[dict]:
    rep = certify(game, seed=seed)
    if rep.strong_monotone.certified:
        eta, source = rep.strong_monotone.constant, rep.strong_monotone.route.value
    elif rep.p_upsilon.certified:
        eta, source = rep.p_upsilon.constant, rep.p_upsilon.route.value
    else:
        return None
    L = sec.get("L_const")
    if L is None and not isinstance(game, LinearQuadraticGame):
        return {"eta_bar": eta, "eta_source": source, "note": "L_const required for this family"}
    lb = lipschitz_bound(game, eta, L)
    return {"eta_bar": lb.eta_bar, "eta_source": source, "L_const": lb.L_const, "L_source": lb.L_source,
            "parameter_lipschitz": lb.bound_y, "delta_max": lb.delta_max}


def run_sensitivity(config, out_dir: Optional[str] = None, tol: Optional[float] = None,
                    seed: Optional[int] = None) -> dict:
    """Equilibrium sensitivity with regularity flags and a finite-difference check.

    Writes ``sensitivity.csv`` (rows are strategy coordinates, columns the
    differentiated parameter entries) and ``sensitivity.json``.

    Raises
    ------
    RegularityError
        Naming the failed assumption; nothing is written in that case.
    """
    cfg = _as_config(config)
    game = cfg.game
    sec = cfg.section("sensitivity")
    names = tuple(game.parameter_names)
    parameter = sec.get("parameter", names[0] if names else None)
    if parameter not in names:
        raise ConfigError(f"sensitivity.parameter: {parameter!r} is not differentiable for the "
                          f"{game.family} family (available: {list(names)})")
    tol = tol if tol is not None else (cfg.tol if cfg.tol is not None else POLISH_TOL)
    seed = seed if seed is not None else (cfg.seed if cfg.seed is not None else SAMPLER_SEED)
    x0 = _start(game, sec.get("x0"), "sensitivity.x0")[0]
    x, _ = _solve_one(game, x0, tol)
    columns = sec.get("columns")
    res = equilibrium_sensitivity(game, x, parameter, columns=columns)
    cols = list(columns) if columns is not None else list(range(game.param_vector(parameter).size))
    fd = _finite_difference(game, x, parameter, cols, float(sec.get("fd_step", 1e-5)), tol)
    fd_err = float(np.max(np.abs(fd - res.grad_y_xstar))) if fd.size else 0.0
    flags = res.regularity
    doc = {
        "parameter": parameter,
        "columns": cols,
        "equilibrium": x,
        "regularity": {"all_pass": flags.all_pass, "second_order": flags.second_order,
                       "second_order_margin": flags.second_order_margin, "full_rank": flags.full_rank,
                       "rank_margin": flags.rank_margin, "strict_complementarity": flags.strict_complementarity,
                       "complementarity_margin": flags.complementarity_margin},
        "active_constraints": res.active.active_indices,
        "gradient": res.grad_y_xstar,
        "finite_difference_error": fd_err,
        "lipschitz": _lipschitz_section(game, sec, seed),
    }
    pert = sec.get("perturbation")
    if pert is not None:
        dy = np.asarray(pert, dtype=float).reshape(-1)
        if dy.size != len(cols):
            raise ConfigError(f"sensitivity.perturbation: expected {len(cols)} entries")
        full = np.zeros(game.param_vector(parameter).size)
        full[cols] = dy
        xp, _ = _solve_one(game.with_param(parameter, game.param_vector(parameter) + full), x, tol)
        doc["perturbation"] = {"dy": dy, "predicted_dx": res.grad_y_xstar @ dy, "actual_dx": xp - x}
        if doc["lipschitz"] and "parameter_lipschitz" in doc["lipschitz"]:
            doc["perturbation"]["lipschitz_bound"] = doc["lipschitz"]["parameter_lipschitz"] * np.linalg.norm(dy)
    if _ensure_dir(out_dir):
        header = ["coordinate"] + [f"d_{parameter}_{c + 1}" for c in cols]
        rows = [[lab] + list(r) for lab, r in zip(strategy_labels(game), res.grad_y_xstar)]
        write_csv(os.path.join(out_dir, "sensitivity.csv"), header, rows)
        _write_json(os.path.join(out_dir, "sensitivity.json"), doc)
    return doc


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netgames", description="Equilibrium analysis of network games.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("analyze", "certificate report"), ("solve", "compute an equilibrium"),
                        ("dynamics", "best-response trajectories"), ("sweep", "equilibria along a parameter"),
                        ("sensitivity", "equilibrium sensitivity")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
        p.add_argument("--out", metavar="DIR", help="output directory (default: config output.dir or '.')")
        p.add_argument("--seed", type=int, help="seed for sampled curvature and monotonicity probes")
        p.add_argument("--tol", type=float, help="residual tolerance override")
        p.add_argument("-q", "--quiet", action="store_true", help="suppress the stdout summary")
    return parser


def _dispatch(args) -> int:
    cfg = load_config(args.config)
    if cfg.command is not None and cfg.command != args.command and not args.quiet:
        print(f"note: config names command {cfg.command!r}; running {args.command!r}", file=sys.stderr)
    out = args.out or cfg.out_dir or "."
    if args.tol is not None and args.tol <= 0:
        raise ConfigError("--tol: must be positive")
    say = (lambda *a: None) if args.quiet else print

    if args.command == "analyze":
        doc = run_analyze(cfg, out, seed=args.seed)
        if not args.quiet:
            _print_analyze(doc)
        return EXIT_OK
    if args.command == "solve":
        doc = run_solve(cfg, out, tol=args.tol)
        say(f"equilibrium: {np.array2string(np.asarray(doc['equilibrium']), precision=10)}")
        say(f"residual: {doc['residual']:.3e} via {doc['mode']}")
        return EXIT_OK
    if args.command == "dynamics":
        for r in run_dynamics(cfg, out, tol=args.tol):
            say(f"{r['csv']}: {r['terminal']} (residual {r['final_residual']:.3e})")
        return EXIT_OK
    if args.command == "sweep":
        values, points = run_sweep(cfg, out, tol=args.tol)
        for v, p in zip(values, points):
            say(f"{v:.6g}: {len(p)} equilibria")
        return EXIT_OK
    doc = run_sensitivity(cfg, out, tol=args.tol, seed=args.seed)
    say(f"finite-difference error: {doc['finite_difference_error']:.3e}")
    say(np.array2string(np.asarray(doc["gradient"]), precision=10))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, InfeasibleStartError, UnboundedSetError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RegularityError, NotKKTPointError, StepSizeError, QPError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NonConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
