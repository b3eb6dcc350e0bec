"""Batch runner: ``irlearn {run,sweep,diag,cost}``.

Exit codes: 0 success, 1 bad config or usage, 2 iteration cap reached,
3 file system failure. Numbers are written in shortest round-trip form so
two runs with the same config and seed give byte-identical CSV files.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from irlearn import __version__
from irlearn.apprentice import ApprenticeConfig, run_apprenticeship
from irlearn.diagnostics import certify_run, iteration_bound
from irlearn.environments import GridworldSpec, make_expert, make_gridworld, make_random_mdp
from irlearn.exceptions import ConfigError, MaxIterationsError
from irlearn.mdp import MixedPolicy, load_mdp, make_rng
from irlearn.quantum_cost import CostParams, crossover_sweep, subroutine_costs, write_sweep_csv

SEED_ENV = "APPRENTICE_SEED"
ITERATION_COLUMNS = ("iter", "t_margin", "dist_min", "ratio_observed", "ratio_bound", "mc_samples",
                     "wallclock_ms")
DIAG_COLUMNS = ("iter", "distance", "ratio_observed", "ratio_bound", "hypotheses_hold", "satisfied",
                "mix_weight")
SWEEP_COLUMNS = ("eps", "eps_rl", "k", "status", "iterations", "terminal_distance", "iteration_bound")

TOP_KEYS = {"seed", "env", "expert", "eps", "eps_rl", "delta", "rho", "mode", "max_iterations",
            "n_demos", "expert_source", "sweep"}
ENV_KEYS = {
    "gridworld": {"kind", "width", "height", "macrocell_size", "noise", "gamma"},
    "random": {"kind", "num_states", "num_actions", "k", "sparsity", "gamma", "seed"},
    "file": {"kind", "path"},
}
EXPERT_KEYS = {"hidden_w", "mixture_weights", "eps_rl"}
SWEEP_KEYS = {"eps", "eps_rl", "k"}
ALGO_KEYS = ("eps", "eps_rl", "delta", "rho", "mode", "max_iterations", "n_demos", "expert_source")

# substream key for a default hidden reward
_HIDDEN_W_STREAM = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def fmt(v):
    """Shortest round-trip text for CSV cells; ``None`` becomes an empty cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row.get(c)) for c in columns])


def _read_json(path, what):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(what, f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(what, "top level must be a JSON object")
    return data


def _check_keys(section, allowed, prefix):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{prefix}{key}", "unknown key")


def load_config(path):
    """Read and structurally validate a run config; returns a plain dict."""
    cfg = _read_json(path, "config")
    _check_keys(cfg, TOP_KEYS, "")
    env = cfg.get("env")
    if not isinstance(env, dict):
        raise ConfigError("env", "missing or not an object")
    kind = env.get("kind")
    if kind not in ENV_KEYS:
        raise ConfigError("env.kind", f"must be one of {sorted(ENV_KEYS)}, got {kind!r}")
    _check_keys(env, ENV_KEYS[kind], "env.")
    if kind == "file":
        if "path" not in env:
            raise ConfigError("env.path", "required for env.kind 'file'")
        env = dict(env, path=str((Path(path).parent / env["path"]).resolve()))
        cfg = dict(cfg, env=env)
    expert = cfg.get("expert", {})
    if not isinstance(expert, dict):
        raise ConfigError("expert", "must be an object")
    _check_keys(expert, EXPERT_KEYS, "expert.")
    sweep = cfg.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("sweep", "must be an object")
    _check_keys(sweep, SWEEP_KEYS, "sweep.")
    for key, values in sweep.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.{key}", "must be a non-empty list")
    return cfg


def resolve_seed(cfg):
    """Seed from ``APPRENTICE_SEED`` if set, else the config (default 0)."""
    raw = os.environ.get(SEED_ENV)
    if raw is not None and raw != "":
        try:
            seed = int(raw)
        except ValueError:
            raise ConfigError(SEED_ENV, f"must be an integer, got {raw!r}") from None
        return seed, SEED_ENV
    return cfg.get("seed", 0), "config"


def algorithm_config(cfg, seed):
    kwargs = {key: cfg[key] for key in ALGO_KEYS if key in cfg}
    for key in ("eps", "eps_rl"):
        if key not in kwargs:
            raise ConfigError(key, "required")
    return ApprenticeConfig(seed=seed, **kwargs)


def build_environment(env, seed, k=None):
    """Instantiate ``(mdp, features)`` from the ``env`` section.

    ``k`` overrides the feature count: the random kind uses it directly, the
    gridworld kind picks the macrocell size that yields ``k`` cells.
    """
    kind = env["kind"]
    try:
        if kind == "gridworld":
            width, height = env.get("width", 4), env.get("height", 4)
            size = env.get("macrocell_size", 2)
            if k is not None:
                sizes = [m for m in range(1, min(width, height) + 1)
                         if width % m == 0 and height % m == 0 and (width // m) * (height // m) == k]
                if not sizes:
                    raise ConfigError("sweep.k", f"no macrocell size gives {k} cells on a {width}x{height} grid")
                size = sizes[0]
            spec = GridworldSpec(width, height, size, env.get("noise", 0.0), env.get("gamma", 0.9))
            return make_gridworld(spec)
        if kind == "random":
            return make_random_mdp(env.get("num_states", 20), env.get("num_actions", 4),
                                   k if k is not None else env.get("k", 4), env.get("sparsity", 3),
                                   env.get("seed", seed), env.get("gamma", 0.9))
        if k is not None:
            raise ConfigError("sweep.k", "cannot vary k for env.kind 'file'")
        mdp, features = load_mdp(env["path"])
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"env ({kind})", str(exc)) from exc
    if features is None:
        raise ConfigError("env.path", "MDP file has no features")
    return mdp, features


def default_hidden_w(k, kind, seed):
    """Last unit vector on gridworlds, else a seeded point on the l1 sphere."""
    if kind == "gridworld":
        w = np.zeros(k)
        w[-1] = 1.0
        return w
    w = make_rng(seed, _HIDDEN_W_STREAM).uniform(-1.0, 1.0, size=k)
    return w / np.abs(w).sum()


def build_expert(cfg, mdp, features, seed, eps_rl, use_default=False):
    """Expert policy from ``expert.hidden_w`` (one vector or a list mixed by ``mixture_weights``)."""
    section = cfg.get("expert", {})
    kind = cfg["env"]["kind"]
    raw = None if use_default else section.get("hidden_w")
    if raw is None:
        ws = [default_hidden_w(features.k, kind, seed)]
    else:
        arr = np.asarray(raw, dtype=float)
        ws = [arr] if arr.ndim == 1 else list(arr)
    expert_eps = section.get("eps_rl", eps_rl)
    policies = []
    for j, w in enumerate(ws):
        try:
            bundle = make_expert(mdp, features, w, expert_eps, 0, 0, make_rng(seed))
        except ValueError as exc:
            raise ConfigError("expert.hidden_w", str(exc)) from exc
        policies.append(bundle.expert_policy)
    if len(policies) == 1:
        if "mixture_weights" in section and not use_default:
            raise ConfigError("expert.mixture_weights", "needs a list of hidden_w vectors")
        return policies[0], ws
    mix = section.get("mixture_weights", [1.0 / len(policies)] * len(policies))
    try:
        return MixedPolicy(tuple(policies), mix), ws
    except ValueError as exc:
        raise ConfigError("expert.mixture_weights", str(exc)) from exc


def _iteration_rows(result, record_timing):
    rows = []
    for rec in result.records:
        diag = rec.diagnostic
        rows.append({
            "iter": rec.iteration,
            "t_margin": rec.t_margin,
            "dist_min": rec.dist_min,
            "ratio_observed": None if diag is None else diag.ratio_observed,
            "ratio_bound": None if diag is None else diag.ratio_bound,
            "mc_samples": rec.mc_samples,
            "wallclock_ms": rec.wallclock_ms if record_timing else None,
        })
    return rows


def _diagnostic_dict(d):
    return {"iter": d.iteration, "distance": d.distance, "ratio_observed": d.ratio_observed,
            "ratio_bound": d.ratio_bound, "hypotheses_hold": d.hypotheses_hold,
            "satisfied": d.satisfied, "mix_weight": d.mix_weight}


def run_log(cfg, seed, seed_source, result, hidden_ws, phases):
    records = []
    for rec in result.records:
        records.append({
            "iter": rec.iteration, "w": rec.w, "t_margin": rec.t_margin, "dist_min": rec.dist_min,
            "i_min": rec.i_min, "mu_estimate": rec.mu_estimate, "mc_samples": rec.mc_samples,
            "mc_steps": rec.mc_steps, "wallclock_ms": rec.wallclock_ms,
        })
    mu_e = result.mu_expert
    return {
        "version": __version__,
        "config": cfg,
        "resolved_config": asdict(result.config),
        "seeds": {"seed": seed, "source": seed_source,
                  "streams": {"demos": [seed, 0], "estimates": [seed, 1, "i"], "expert_mc": [seed, 2]}},
        "expert": {"hidden_w": hidden_ws, "mu": mu_e.vec, "accuracy": mu_e.accuracy,
                   "method": mu_e.method, "n_samples": mu_e.n_samples},
        "initial_estimate": {"mu": result.estimates[0], "mc_samples": result.initial_samples},
        "iterations": records,
        "diagnostics": [_diagnostic_dict(r.diagnostic) for r in result.records if r.diagnostic is not None],
        "summary": {
            "status": result.status, "n": result.n, "i_min": result.i_min,
            "terminal_distance": result.terminal_distance, "threshold": result.config.threshold,
            "n_max": result.n_max, "mixture_weights": result.weights, "warnings": result.warnings,
        },
        "wallclock_s": dict(phases, **result.timings),
    }


def _prepare(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    seed, source = resolve_seed(cfg)
    config = algorithm_config(cfg, seed)
    mdp, features = build_environment(cfg["env"], seed)
    t1 = time.perf_counter()
    expert, ws = build_expert(cfg, mdp, features, seed, config.eps_rl)
    phases = {"setup_s": t1 - t0, "expert_policy_s": time.perf_counter() - t1}
    return cfg, seed, source, config, mdp, features, expert, ws, phases


def _run_once(config, mdp, features, expert):
    try:
        return run_apprenticeship(config, mdp, features, expert_policy=expert), 0
    except MaxIterationsError as exc:
        return exc.result, 2


def cmd_run(args, out):
    cfg, seed, source, config, mdp, features, expert, ws, phases = _prepare(args)
    result, code = _run_once(config, mdp, features, expert)
    _write_json(out / "run.json", run_log(cfg, seed, source, result, ws, phases))
    _write_csv(out / "iterations.csv", ITERATION_COLUMNS, _iteration_rows(result, args.record_timing))
    print(f"{result.status}: n={result.n} i_min={result.i_min} "
          f"distance={result.terminal_distance:.6g} (threshold {config.threshold:.6g})")
    return code


def cmd_diag(args, out):
    cfg, seed, source, config, mdp, features, expert, ws, phases = _prepare(args)
    config = replace(config, mode="ideal")
    result, code = _run_once(config, mdp, features, expert)
    cert = certify_run(result, features.k, mdp.discount)
    steps = [_diagnostic_dict(d) for d in cert.pop("steps")]
    _write_csv(out / "diagnostics.csv", DIAG_COLUMNS, steps)
    log = run_log(cfg, seed, source, result, ws, phases)
    log["certificate"] = cert
    _write_json(out / "run.json", log)
    print(f"{result.status}: n={result.n} contraction_ok={cert['contraction_ok']} "
          f"bound={'vacuous' if cert['bound_vacuous'] else cert['iteration_bound']}")
    return code


def _bound_text(eps, eps_rl, k, gamma):
    bound = iteration_bound(k, gamma, eps, eps_rl)
    return "vacuous" if bound.vacuous else repr(bound.iterations)


def cmd_sweep(args, out):
    cfg = load_config(args.config)
    seed, _ = resolve_seed(cfg)
    base = algorithm_config(cfg, seed)
    grid = cfg.get("sweep", {})
    eps_values = grid.get("eps", [base.eps])
    rl_values = grid.get("eps_rl", [base.eps_rl])
    k_values = grid.get("k", [None])
    rows = []
    for k in k_values:
        mdp, features = build_environment(cfg["env"], seed, k)
        for eps in eps_values:
            for eps_rl in rl_values:
                row = {"eps": eps, "eps_rl": eps_rl, "k": features.k}
                try:
                    config = replace(base, eps=eps, eps_rl=eps_rl)
                except ConfigError as exc:
                    row["status"] = f"invalid ({exc.field})"
                    rows.append(row)
                    continue
                expert, _ = build_expert(cfg, mdp, features, seed, eps_rl, use_default=k is not None)
                result, _ = _run_once(config, mdp, features, expert)
                row.update(status=result.status, iterations=result.n,
                           terminal_distance=result.terminal_distance,
                           iteration_bound=_bound_text(eps, eps_rl, features.k, mdp.discount))
                rows.append(row)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([row.get(c, "") if c in ("status", "iteration_bound") else fmt(row.get(c))
                             for c in SWEEP_COLUMNS])
    print(f"{len(rows)} cells written to {out / 'sweep.csv'}")
    return 0


def cmd_cost(args, out):
    data = _read_json(args.params, "params")
    grid = data.pop("sweep", None)
    names = {"k", "S", "A", "gamma", "eps", "eps_rl", "delta", "n"}
    _check_keys(data, names, "")
    for name in ("k", "S", "A", "gamma", "eps", "eps_rl"):
        if name not in data:
            raise ConfigError(name, "required")
    try:
        params = CostParams(**data)
    except ValueError as exc:
        first = str(exc).split()[0]
        raise ConfigError(first if first in names else "params", str(exc)) from exc
    if grid is None:
        grid = {"k": [params.k]}
    if not isinstance(grid, dict):
        raise ConfigError("sweep", "must be an object")
    _check_keys(grid, names, "sweep.")
    try:
        rows = [crossover_sweep(params, {"k": [params.k]})[0]] + crossover_sweep(params, grid)
    except ValueError as exc:
        raise ConfigError("sweep", str(exc)) from exc
    _write_json(out / "cost_report.json", subroutine_costs(params).to_dict())
    write_sweep_csv(out / "crossover.csv", rows)
    report = subroutine_costs(params)
    print(f"classical {report.classical_total:.6g}  quantum {report.quantum_total:.6g}  "
          f"speedup {report.speedup:.3g}")
    return 0


def build_parser():
    parser = _Parser(prog="irlearn", description="Apprenticeship learning experiments on tabular MDPs.")
    parser.add_argument("--version", action="version", version=f"irlearn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in (("run", "run the learning loop once"),
                           ("sweep", "grid over eps, eps_rl and k"),
                           ("diag", "exact-oracle run with contraction certificates")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON run config")
        p.add_argument("--out", default="out", help="output directory (default ./out)")
        if name == "run":
            p.add_argument("--record-timing", action="store_true",
                           help="fill the wallclock_ms column (breaks byte-identical replay)")
    p = sub.add_parser("cost", help="analytical cost report and crossover table")
    p.add_argument("--params", required=True, help="JSON cost parameters")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    return parser


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "diag": cmd_diag, "cost": cmd_cost}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"irlearn: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"irlearn: config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"irlearn: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
