"""Command-line front end.

    python -m selfair oracle     --config oracle.yaml --out results/
    python -m selfair pof-curve  --config curve.yaml  --out results/
    python -m selfair simulate   --config cell.yaml   --out results/ --policies osf,no-admission
    python -m selfair sla-sweep  --config cell.yaml   --out results/

Configs are YAML (JSON also parses). Every section is optional and falls back
to the defaults below; unknown keys are rejected. Exit status is 0 when all
artifacts were written, 2 for an invalid config and 1 for other failures.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._rng import stream
from .channel import (RateAlphabet, RateDistribution, dominance_ordering, expected_max_rate,
                      rayleigh_rate_distribution)
from .oracle import FairnessSpec, best_subset, subset_solutions
from .sim import DEFAULT_POLICIES, Policy, ScenarioConfig, pof_curve, run_experiment, run_policy
from .sla import SlaSpec, build_table_benchmark, offline_optimum, run_dpp

DEFAULTS = {
    "scenario": {
        "population": 30, "activity_prob": 0.1, "cell_edge_snr_db": -5.0,
        "pathloss_exponent": 3.5, "min_radius": 0.05, "slots_per_realization": 1500,
        "realizations": 1000, "alpha": 1.0, "epsilon": 0.05, "v": 30.0, "master_seed": 1,
        "rates": [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 4.5], "drift_window": 1000,
        "drift_limit": 0.05,
    },
    "policies": list(DEFAULT_POLICIES),
    "pof_alphas": [0.5, 1.0, 2.0],
    "oracle": {
        "users": [{"deterministic": 2.0}, {"deterministic": 1.0}],
        "alpha": 1.0, "s_min": 1, "tol": 1e-9,
    },
    "pof_curve": {
        "strong_users": 10, "max_weak": 10, "weak_offset_db": 20.0, "alphas": [0.0, 1.0, 10.0],
        "slots": 200_000, "model": "exponential", "levels": 64, "mean_rate": 1.0,
        "master_seed": 1,
    },
    "sla_sweep": {
        "v": [1.0, 10.0, 100.0], "epsilon": [0.05], "benchmark_types": 12,
        "benchmark_max_users": 4, "benchmark_realizations": 200_000, "simulate": True,
    },
}


class ConfigError(ValueError):
    pass


def _merge(defaults, given, where):
    if given is None:
        return dict(defaults) if isinstance(defaults, dict) else defaults
    if isinstance(defaults, dict):
        if not isinstance(given, dict):
            raise ConfigError(f"{where} must be a mapping")
        unknown = set(given) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
        return {k: (_merge(v, given.get(k), f"{where}.{k}") if isinstance(v, dict)
                    else given.get(k, v)) for k, v in defaults.items()}
    return given


def load_config(path):
    raw = {}
    if path is not None:
        try:
            raw = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return _merge(DEFAULTS, raw, "config")


def scenario_from(cfg, seed=None):
    sc = dict(cfg["scenario"])
    try:
        sla = SlaSpec(float(sc.pop("epsilon")), float(sc.pop("v")))
        if seed is not None:
            sc["master_seed"] = seed
        sc["rates"] = tuple(float(r) for r in sc["rates"])
        RateAlphabet(sc["rates"])
        return ScenarioConfig(sla=sla, **sc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def _user_from(entry):
    if "deterministic" in entry:
        return RateDistribution.deterministic(float(entry["deterministic"]))
    if "mean_snr_db" in entry:
        return rayleigh_rate_distribution(float(entry["mean_snr_db"]))
    if "rates" in entry and "pmf" in entry:
        return RateDistribution(RateAlphabet(tuple(entry["rates"])), tuple(entry["pmf"]))
    raise ConfigError(f"cannot build a user from {entry!r}")


# -- output helpers ------------------------------------------------------------------

def fmt(x):
    """Nine significant digits, '.' decimal, no grouping."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    Path(path).write_text(buf.getvalue())
    return buf.getvalue()


def as_written(x):
    """The value a reader of the CSV sees, so JSON and CSV agree exactly."""
    return float(fmt(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


# -- subcommands ------------------------------------------------------------------------

def cmd_oracle(cfg, args):
    oc = cfg["oracle"]
    users = [_user_from(u) for u in oc["users"]]
    spec = FairnessSpec(float(oc["alpha"]))
    s_min = int(oc["s_min"])
    if not 1 <= s_min <= len(users):
        raise ConfigError("s_min must lie in 1..number of users")
    sols = subset_solutions(users, spec, s_min, tol=float(oc["tol"]))
    best = best_subset(sols)
    max_sum = expected_max_rate(users)
    rows = []
    for us in sorted(sols, key=lambda s: s.key()):
        sol = sols[us]
        pof = 0.0 if spec.alpha == 0 else max(0.0, (max_sum - sol.total) / max_sum)
        rows.append({"members": list(us.members), "total": sol.total,
                     "point": [float(v) for v in sol.point], "pof": pof, "fw_gap": sol.gap})
    full = next(r for r in rows if len(r["members"]) == len(users))
    out = {
        "alpha": spec.alpha, "s_min": s_min, "max_sum": max_sum,
        "subsets": rows,
        "best": {"members": list(best.set.members), "total": best.total},
        "pof": full["pof"],
        "dominance_order": dominance_ordering(users),
    }
    path = Path(args.out) / "oracle.json"
    write_json(path, out)
    return [path]


def cmd_pof_curve(cfg, args):
    pc = cfg["pof_curve"]
    seed = args.seed if args.seed is not None else int(pc["master_seed"])
    rows = pof_curve(int(pc["strong_users"]), int(pc["max_weak"]), float(pc["weak_offset_db"]),
                     [float(a) for a in pc["alphas"]], int(pc["slots"]), seed, pc["model"],
                     int(pc["levels"]), float(pc["mean_rate"]), args.parallel)
    path = Path(args.out) / "pof_curve.csv"
    write_csv(path, ["m", "alpha", "one_minus_pof"], rows)
    return [path]


def _policies(cfg, args, scenario):
    names = args.policies.split(",") if args.policies else cfg["policies"]
    try:
        return [Policy.parse(n, scenario) for n in names]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(cfg, args):
    scenario = scenario_from(cfg, args.seed)
    policies = _policies(cfg, args, scenario)
    alphas = [float(a) for a in cfg["pof_alphas"]]
    report = run_experiment(scenario, policies, alphas, args.parallel)
    out = Path(args.out)
    n = scenario.realizations
    adm_rows, thr_rows = [], []
    for i in range(n):
        for name, r in report.policies.items():
            adm_rows.append((i, name, r.admission_running[i]))
            thr_rows.append((i, name, r.throughput_running[i]))
    write_csv(out / "admission.csv", ["realization_index", "policy", "admission_prob_running"],
              adm_rows)
    write_csv(out / "throughput.csv", ["realization_index", "policy", "throughput_running"],
              thr_rows)
    pof_rows = [(a, name, p) for a, table in (report.pof_by_alpha or {}).items()
                for name, p in table.items()]
    write_csv(out / "pof_vs_alpha.csv", ["alpha", "policy", "pof"], pof_rows)
    eps = scenario.sla.epsilon
    best = report.best_threshold()
    summary = {
        "master_seed": scenario.master_seed,
        "realizations": n,
        "epsilon": eps,
        "v": scenario.sla.v,
        "common_random_numbers": report.common_random_numbers(),
        "best_sla_threshold": best.policy if best else None,
        "policies": {
            name: {
                "throughput": as_written(r.throughput),
                "admission_prob": as_written(r.admission),
                "min_user_admission": float(r.per_user_admission().min())
                if r.active_counts.any() else None,
                "queue_over_n": r.queue[-1] / n,
                "pof": r.pof,
                "sla_satisfied": bool(r.sla_satisfied(eps)),
                "drift_flagged_realizations": r.drift_flags,
                "fading_digest": r.fading_digest,
            } for name, r in report.policies.items()},
        "pof_vs_alpha": {str(a): {k: as_written(v) for k, v in t.items()}
                         for a, t in (report.pof_by_alpha or {}).items()},
    }
    write_json(out / "summary.json", summary)
    return [out / "admission.csv", out / "throughput.csv", out / "pof_vs_alpha.csv",
            out / "summary.json"]


def _sweep_job(job):
    scenario, eps, v = job
    c = replace(scenario, sla=SlaSpec(eps, v))
    r = run_policy(c, "osf")
    return eps, v, r.throughput, r.admission, r.queue[-1] / c.realizations


def cmd_sla_sweep(cfg, args):
    sw = cfg["sla_sweep"]
    scenario = scenario_from(cfg, args.seed)
    seed = scenario.master_seed
    bench = build_table_benchmark(stream(seed, "benchmark"), int(sw["benchmark_types"]),
                                  int(sw["benchmark_max_users"]), scenario.alpha)
    rows = []
    grid = [(float(e), float(v)) for e in sw["epsilon"] for v in sw["v"]]
    for eps, v in grid:
        opt = offline_optimum(bench, eps)
        r = run_dpp(bench, SlaSpec(eps, v), int(sw["benchmark_realizations"]),
                    stream(seed, "benchmark-types"), stream(seed, "benchmark-arrivals"))
        rows.append(("dpp-table", eps, v, r.throughput, r.admitted_fraction, r.queue_over_n, opt,
                     r.admitted_fraction >= 1 - eps - 0.01))
    if sw["simulate"]:
        jobs = [(scenario, eps, v) for eps, v in grid]
        if args.parallel > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(max_workers=args.parallel) as pool:
                res = list(pool.map(_sweep_job, jobs))
        else:
            res = [_sweep_job(j) for j in jobs]
        for eps, v, thr, adm, q in res:
            rows.append(("osf-sim", eps, v, thr, adm, q, float("nan"), adm >= 1 - eps - 0.01))
    path = Path(args.out) / "sla_sweep.csv"
    write_csv(path, ["mode", "epsilon", "v", "throughput", "admission", "queue_over_n",
                     "offline_optimum", "sla_satisfied"], rows)
    return [path]


COMMANDS = {"oracle": cmd_oracle, "pof-curve": cmd_pof_curve, "simulate": cmd_simulate,
            "sla-sweep": cmd_sla_sweep}


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_parser():
    p = argparse.ArgumentParser(prog="selfair", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="YAML/JSON config; defaults are used when omitted")
        s.add_argument("--seed", type=int, help="master seed (overrides the config)")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--parallel", type=int, default=os.cpu_count() or 1,
                       help="worker processes for independent runs")
        s.add_argument("--policies", help="comma-separated policies for simulate, e.g. "
                       "osf,no-admission,threshold:-3,threshold:sla")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    start = time.time()
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if args.parallel < 1:
            raise ConfigError("--parallel must be at least 1")
        cfg = load_config(args.config)
        Path(args.out).mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = {
        "command": args.command,
        "config": cfg,
        "config_path": args.config,
        "master_seed": args.seed,
        "policies": args.policies,
        "artifacts": {Path(p).name: _sha256(p) for p in paths},
        "version": __version__,
        "duration_s": round(time.time() - start, 3),
    }
    write_json(Path(args.out) / "manifest.json", manifest)
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
