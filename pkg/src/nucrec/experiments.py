"""Experiment pipelines behind the CLI subcommands.

Each runner takes a validated config dict, executes seeded trials (optionally
in parallel over a worker pool), and writes plot-ready CSV plus a JSON
summary.  Outputs are deterministic functions of (config, seed): per-trial
seeds are derived from the master seed and the trial index, and aggregation
is an ordered reduction by trial index.
"""

import csv
import hashlib
import json
import math
import multiprocessing
from pathlib import Path

import numpy as np

import nucrec
from nucrec.linalg import frobenius_norm, numerical_rank
from nucrec.operators import make_scenario
from nucrec.ensembles import EnsembleSpec, draw_operator, draw_low_rank_signal, derive_seed
from nucrec.solvers import SolverConfig, solve_mbp, solve_mds, solve_mlasso
from nucrec.cmsv import estimate_cmsv, brute_force_cmsv, estimate_rcsv, mric_upper_bound
from nucrec.bounds import (
    BoundReport,
    verify_bound,
    noise_operator_bound,
    bound_mbp_mric,
    BoundInapplicable,
)

SQRT2 = math.sqrt(2.0)


class SolverDidNotConverge(RuntimeError):
    """At least one trial failed to converge; partial results were written."""


def config_hash(config):
    """Stable hash of the canonical JSON form of the config."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _solver_config(config):
    s = config.get("solver", {})
    return SolverConfig(
        max_iters=s.get("max_iters", 20000),
        abs_tol=s.get("abs_tol", 1e-8),
        rel_tol=s.get("rel_tol", 1e-6),
        admm_rho=s.get("admm_rho", 1.0),
    )


def _ensemble_spec(config, seed, m=None):
    e = config["ensemble"]
    return EnsembleSpec(
        kind=e["kind"],
        n1=e["n1"],
        n2=e["n2"],
        m=m if m is not None else e["m"],
        seed=seed,
        normalize=e.get("normalize", False),
    )


def _write_csv(path, columns, rows, meta):
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={meta['config_hash']} version={meta['version']}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row)


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _meta(config):
    return {"config_hash": config_hash(config), "version": nucrec.__version__}


def _map_trials(worker, args_list, jobs):
    if jobs > 1 and len(args_list) > 1:
        with multiprocessing.Pool(jobs) as pool:
            return pool.map(worker, args_list)
    return [worker(a) for a in args_list]


# --- recover ---------------------------------------------------------------


def _recover_trial(args):
    config, trial = args
    seed = config["seed"]
    op_seed = derive_seed(seed, trial * 4 + 0)
    sig_seed = derive_seed(seed, trial * 4 + 1)
    noise_seed = derive_seed(seed, trial * 4 + 2)

    spec = _ensemble_spec(config, op_seed)
    op = draw_operator(spec)
    sig = config["signal"]
    x = draw_low_rank_signal(spec.n1, spec.n2, sig["r"], sig.get("scale", 1.0), sig_seed)
    noise = config.get("noise", {"kind": "none"})
    scn = make_scenario(
        op,
        x,
        noise_kind=noise.get("kind", "none"),
        epsilon=noise.get("epsilon", 0.0),
        sigma=noise.get("sigma", 0.0),
        seed=noise_seed,
    )
    cfg = _solver_config(config)
    alg = config["algorithm"]
    name = alg["name"]
    if name == "mbp":
        res = solve_mbp(scn, alg.get("epsilon", noise.get("epsilon", 0.0)), cfg)
        params = {"epsilon": alg.get("epsilon", noise.get("epsilon", 0.0))}
    elif name == "mds":
        res = solve_mds(scn, alg["lambda"], cfg)
        params = {"lambda": alg["lambda"]}
    elif name == "mlasso":
        res = solve_mlasso(scn, alg["mu"], cfg)
        params = {"mu": alg["mu"], "kappa": alg.get("kappa", 0.5)}
    else:
        raise ValueError(f"unknown algorithm {name!r}")

    realized = frobenius_norm(np.asarray(res.x_hat) - x)
    rel_err = realized / max(frobenius_norm(x), 1e-300)

    report = None
    if spec.n1 * spec.n2 <= 9:
        r = max(1, numerical_rank(x))
        n_min = min(spec.n1, spec.n2)
        kappa = params.get("kappa", 0.0)
        if name == "mlasso":
            tau = min(8.0 * r / (1.0 - kappa) ** 2, float(n_min))
        else:
            tau = min(8.0 * r, float(n_min))
        rho = brute_force_cmsv(op, tau, "min", samples=10_000 * 10, seed=derive_seed(seed, trial * 4 + 3))
        try:
            report = verify_bound(scn, res, name, params, rho)
        except BoundInapplicable:
            report = None

    row = {
        "trial": trial,
        "algorithm": name,
        "converged": res.converged,
        "feasible": res.feasible,
        "iterations": res.iterations,
        "realized_error": realized,
        "relative_error": rel_err,
        "objective": res.objective,
        "bound_value": report.bound_value if report else "",
        "holds": report.holds if report else "",
        "slack_ratio": report.slack_ratio if report else "",
        "tau_H": report.cone_check["tau_H"] if report else "",
        "cone_satisfied": report.cone_check["satisfied"] if report else "",
    }
    return row


RECOVER_COLUMNS = (
    "trial",
    "algorithm",
    "converged",
    "feasible",
    "iterations",
    "realized_error",
    "relative_error",
    "objective",
    "bound_value",
    "holds",
    "slack_ratio",
    "tau_H",
    "cone_satisfied",
)


def run_recover(config, out_dir, jobs=1, formats=("csv", "json")):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trials = config["trials"]
    rows = _map_trials(_recover_trial, [(config, t) for t in range(trials)], jobs)
    meta = _meta(config)
    if "csv" in formats:
        _write_csv(
        out / "recover.csv",
        RECOVER_COLUMNS,
        [[row[c] for c in RECOVER_COLUMNS] for row in rows],
        meta,
    )
    n_conv = sum(1 for r in rows if r["converged"])
    summary = {
        **meta,
        "kind": "recover",
        "trials": trials,
        "converged": n_conv,
        "mean_relative_error": float(np.mean([r["relative_error"] for r in rows])),
        "rows": rows,
    }
    if "json" in formats:
        _write_json(out / "recover.json", summary)
    if n_conv < trials:
        raise SolverDidNotConverge(f"{trials - n_conv} of {trials} trials did not converge")
    return summary


# --- cmsv ------------------------------------------------------------------


def _cmsv_trial(args):
    config, trial = args
    seed = config["seed"]
    est = config.get("estimation", {})
    spec = _ensemble_spec(config, derive_seed(seed, trial * 2))
    op = draw_operator(spec)
    tau = est.get("tau", 2.0)
    starts = est.get("starts", 32)
    cfg = _solver_config(config)
    lo = estimate_cmsv(op, tau, "min", starts=starts, seed=derive_seed(seed, trial * 2 + 1), cfg=cfg)
    hi = estimate_cmsv(op, tau, "max", starts=starts, seed=derive_seed(seed, trial * 2 + 1), cfg=cfg)
    return {"trial": trial, "tau": tau, "rho_min": lo.value, "rho_max": hi.value}


CMSV_COLUMNS = ("trial", "tau", "rho_min", "rho_max")


def run_cmsv(config, out_dir, jobs=1, formats=("csv", "json")):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trials = config["trials"]
    rows = _map_trials(_cmsv_trial, [(config, t) for t in range(trials)], jobs)
    meta = _meta(config)
    if "csv" in formats:
        _write_csv(out / "cmsv.csv", CMSV_COLUMNS, [[row[c] for c in CMSV_COLUMNS] for row in rows], meta)
    summary = {
        **meta,
        "kind": "cmsv",
        "trials": trials,
        "mean_rho_min": float(np.mean([r["rho_min"] for r in rows])),
        "mean_rho_max": float(np.mean([r["rho_max"] for r in rows])),
        "rows": rows,
    }
    if "json" in formats:
        _write_json(out / "cmsv.json", summary)
    return summary


# --- montecarlo ------------------------------------------------------------


def _montecarlo_trial(args):
    config, m, trial = args
    seed = config["seed"]
    est = config.get("estimation", {})
    tau = est.get("tau", 2.0)
    starts = est.get("starts", 8)
    spec = _ensemble_spec(config, derive_seed(seed, m * 100_003 + trial * 2), m=m)
    # normalized operator A/sqrt(m) regardless of the ensemble's own flag
    spec = EnsembleSpec(spec.kind, spec.n1, spec.n2, spec.m, spec.seed, normalize=True)
    op = draw_operator(spec)
    cfg = _solver_config(config)
    est_seed = derive_seed(seed, m * 100_003 + trial * 2 + 1)
    lo = estimate_cmsv(op, tau, "min", starts=starts, seed=est_seed, cfg=cfg)
    hi = estimate_cmsv(op, tau, "max", starts=starts, seed=est_seed, cfg=cfg)
    return {"m": m, "trial": trial, "rho_min": lo.value, "rho_max": hi.value}


MC_COLUMNS = ("m", "trial", "rho_min", "rho_max", "in_band")


def run_montecarlo_cmsv(config, out_dir, jobs=1, formats=("csv", "json")):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trials = config["trials"]
    est = config.get("estimation", {})
    m_sweep = est.get("m_sweep", [config["ensemble"]["m"]])
    eps_band = est.get("epsilon_band", 0.35)
    args = [(config, m, t) for m in m_sweep for t in range(trials)]
    rows = _map_trials(_montecarlo_trial, args, jobs)
    lo_b, hi_b = 1.0 - eps_band, 1.0 + eps_band
    for row in rows:
        row["in_band"] = bool(lo_b <= row["rho_min"] and row["rho_max"] <= hi_b)
    meta = _meta(config)
    if "csv" in formats:
        _write_csv(out / "montecarlo.csv", MC_COLUMNS, [[row[c] for c in MC_COLUMNS] for row in rows], meta)
    per_m = {}
    for m in m_sweep:
        sub = [row for row in rows if row["m"] == m]
        per_m[str(m)] = {
            "fraction_in_band": float(np.mean([row["in_band"] for row in sub])),
            "mean_rho_min": float(np.mean([row["rho_min"] for row in sub])),
            "mean_rho_max": float(np.mean([row["rho_max"] for row in sub])),
            "std_rho_min": float(np.std([row["rho_min"] for row in sub])),
            "std_rho_max": float(np.std([row["rho_max"] for row in sub])),
        }
    summary = {
        **meta,
        "kind": "montecarlo",
        "trials": trials,
        "epsilon_band": eps_band,
        "m_sweep": list(m_sweep),
        "per_m": per_m,
    }
    if "json" in formats:
        _write_json(out / "montecarlo.json", summary)
    return summary


# --- bounds ledger ---------------------------------------------------------

LEDGER_COLUMNS = (
    "epsilon",
    "trial",
    "realized_error",
    "cmsv_bound",
    "cmsv_holds",
    "mric_bound",
    "mric_applicable",
    "rho_hat",
    "delta_hat",
)


def run_bounds_ledger(config, out_dir, jobs=1, formats=("csv", "json")):
    """Realized mBP error versus both bound families on an oracle-sized
    instance, over a grid of bounded-noise levels.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    e = config["ensemble"]
    if e["n1"] * e["n2"] > 9:
        raise ValueError("bounds ledger requires an oracle-sized instance (n1*n2 <= 9)")
    seed = config["seed"]
    trials = config["trials"]
    sig = config["signal"]
    eps_grid = config.get("epsilon_grid", [0.0, 0.05, 0.1, 0.2])
    cfg = _solver_config(config)
    n_min = min(e["n1"], e["n2"])
    r = sig["r"]
    tau_rho = min(8.0 * r, float(n_min))
    r4 = min(4 * r, n_min)

    rows = []
    for trial in range(trials):
        spec = _ensemble_spec(config, derive_seed(seed, trial * 8))
        op = draw_operator(spec)
        x = draw_low_rank_signal(e["n1"], e["n2"], r, sig.get("scale", 1.0), derive_seed(seed, trial * 8 + 1))
        rho = brute_force_cmsv(op, tau_rho, "min", samples=100_000, seed=derive_seed(seed, trial * 8 + 2))
        nu_lo = estimate_rcsv(op, r4, "min", starts=8, seed=derive_seed(seed, trial * 8 + 3))
        nu_hi = estimate_rcsv(op, r4, "max", starts=8, seed=derive_seed(seed, trial * 8 + 4))
        delta_hat = mric_upper_bound(nu_lo.value, nu_hi.value)
        for eps in eps_grid:
            scn = make_scenario(
                op, x, noise_kind="bounded" if eps > 0 else "none", epsilon=eps,
                seed=derive_seed(seed, trial * 8 + 5),
            )
            res = solve_mbp(scn, eps, cfg)
            realized = frobenius_norm(np.asarray(res.x_hat) - x)
            if rho.value > 0:
                cb = 2.0 * eps / rho.value
                cmsv_bound, cmsv_holds = cb, realized <= cb + 1e-9
            else:
                cmsv_bound, cmsv_holds = "", ""
            try:
                mb = bound_mbp_mric(eps, delta_hat)
                mric_bound, applicable = mb, True
            except BoundInapplicable:
                mric_bound, applicable = "inapplicable", False
            rows.append(
                {
                    "epsilon": eps,
                    "trial": trial,
                    "realized_error": realized,
                    "cmsv_bound": cmsv_bound,
                    "cmsv_holds": cmsv_holds,
                    "mric_bound": mric_bound,
                    "mric_applicable": applicable,
                    "rho_hat": rho.value,
                    "delta_hat": delta_hat,
                }
            )
    meta = _meta(config)
    if "csv" in formats:
        _write_csv(out / "bounds.csv", LEDGER_COLUMNS, [[row[c] for c in LEDGER_COLUMNS] for row in rows], meta)
    summary = {**meta, "kind": "bounds", "trials": trials, "epsilon_grid": list(eps_grid), "rows": rows}
    if "json" in formats:
        _write_json(out / "bounds.json", summary)
    return summary


# --- noise calibration -----------------------------------------------------

NOISECAL_COLUMNS = ("quantile", "value")


def run_noise_calibration(config, out_dir, jobs=1, formats=("csv", "json")):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = config["seed"]
    e = config["ensemble"]
    noise = config.get("noise", {})
    sigma = noise.get("sigma", 1.0)
    c = config.get("c", 8.0)
    spec = _ensemble_spec(config, derive_seed(seed, 0))
    op = draw_operator(spec)
    record = noise_operator_bound(op, sigma, e["n2"], config["trials"], derive_seed(seed, 1), c=c)
    qrows = [[q, v] for q, v in sorted(record["quantiles"].items())]
    meta = _meta(config)
    if "csv" in formats:
        _write_csv(out / "noise_cal.csv", NOISECAL_COLUMNS, qrows, meta)
    lam_pick = record["quantiles"]["0.95"]
    summary = {
        **meta,
        "kind": "noise-calibration",
        "sigma": sigma,
        "c": c,
        "threshold": record["threshold"],
        "exceed_fraction": record["exceed_fraction"],
        "quantiles": record["quantiles"],
        "suggested_lambda": lam_pick,
        "suggested_mu": 2.0 * lam_pick,
    }
    if "json" in formats:
        _write_json(out / "noise_cal.json", summary)
    return summary


RUNNERS = {
    "recover": run_recover,
    "cmsv": run_cmsv,
    "montecarlo": run_montecarlo_cmsv,
    "bounds": run_bounds_ledger,
    "noise-calibration": run_noise_calibration,
}
