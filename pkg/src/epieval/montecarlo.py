"""Replication harness: scenarios x estimators x replications, with bias, RMSE,
median absolute deviation, and rejection-rate summaries."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .estimate import EstimatorOptions, estimate_series
from .inference import multiplier_bootstrap, pointwise_crit
from .scenario import EconParams, ScenarioConfig, build_panel


@dataclass
class McReport:
    """Summary table over (scenario, estimator) with Monte Carlo standard errors."""

    table: pd.DataFrame
    reps: int
    horizon: int
    root_seed: int

    def to_csv(self, path) -> None:
        self.table.to_csv(path, index=False)

    def to_text(self) -> str:
        cols = ["scenario", "estimator", "bias", "rmse", "mad", "rej_prob",
                "mc_se_bias", "mc_se_rmse", "mc_se_rej", "reps_used", "failures"]
        fmt = self.table[cols].copy()
        for col in ("bias", "rmse", "mad", "rej_prob", "mc_se_bias", "mc_se_rmse", "mc_se_rej"):
            fmt[col] = fmt[col].map(lambda v: f"{v:.3f}")
        return fmt.to_string(index=False)


def _one_replication(config: ScenarioConfig, estimators, horizon, rep_seed, draws, level,
                     options: EstimatorOptions):
    cfg = replace(config, root_seed=rep_seed)
    t_simulate = cfg.earliest_policy + horizon
    panel = build_panel(cfg, t_simulate=t_simulate)
    crit = pointwise_crit(level)
    out = {}
    for estimator in estimators:
        try:
            series = estimate_series(panel, estimator, horizon=horizon, options=options)
            overall = float(series.estimates.mean())
            infl = series.influence.mean(axis=1)
            boot_rng = np.random.default_rng([rep_seed, 0xB007])
            se, _ = multiplier_bootstrap(infl[:, None], draws=draws, level=level, rng=boot_rng)
            se = float(se[0])
            reject = bool(se > 0 and abs(overall) / se > crit)
            out[estimator] = (overall, se, reject, None)
        except Exception as exc:  # recorded per estimator, never silently dropped
            out[estimator] = (np.nan, np.nan, False, repr(exc))
    return out


def run_scenario(
    config: ScenarioConfig,
    estimators,
    reps: int,
    horizon: int = 50,
    root_seed: int | None = None,
    truth: float = 0.0,
    draws: int = 999,
    level: float = 0.95,
    options: EstimatorOptions = EstimatorOptions(),
    n_jobs: int = 1,
    scenario_label: str | None = None,
) -> McReport:
    """Simulate `reps` panels and summarize each estimator's time-averaged effect.

    All estimators share the same panel within a replication (paired design).
    Estimates cover the first `horizon` post-policy periods and are averaged
    across event time before testing H0: effect = 0 at the given level.
    """
    if reps < 2:
        raise ValueError("need at least 2 replications")
    seed = config.root_seed if root_seed is None else root_seed
    rep_seeds = [seed * (2 ** 24) + rep for rep in range(reps)]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_one_replication)(config, tuple(estimators), horizon, rep_seed, draws, level, options)
        for rep_seed in rep_seeds
    )
    label = scenario_label or (
        f"t*={config.policy_time} lamD={config.lambda_d:g} lamU={config.lambda_u:g} "
        f"n={config.n_locations}"
    )
    rows = []
    for estimator in estimators:
        ests = np.array([r[estimator][0] for r in results])
        rejects = np.array([r[estimator][2] for r in results])
        failures = [r[estimator][3] for r in results if r[estimator][3] is not None]
        ok = ~np.isnan(ests)
        used = int(ok.sum())
        if used == 0:
            bias = rmse = mad = rej_prob = np.nan
            mc_se_bias = mc_se_rmse = mc_se_rej = np.nan
            mads = [np.nan, np.nan]
        else:
            err = ests[ok] - truth
            rej = rejects[ok]
            bias = float(err.mean())
            rmse = float(np.sqrt(np.mean(err ** 2)))
            mad = float(np.median(np.abs(err)))
            rej_prob = float(rej.mean())
            mc_se_bias = float(err.std(ddof=1) / np.sqrt(used))
            sq = err ** 2
            mc_se_rmse = float(sq.std(ddof=1) / np.sqrt(used) / (2 * rmse)) if rmse > 0 else 0.0
            mc_se_rej = float(np.sqrt(max(rej_prob * (1 - rej_prob), 1e-12) / used))
            mad_boot = np.random.default_rng([seed, 0x3AD])
            mads = [np.median(np.abs(mad_boot.choice(err, size=used))) for _ in range(500)]
        rows.append({
            "scenario": label,
            "estimator": estimator,
            "policy_time": config.policy_time,
            "lambda_d": config.lambda_d,
            "lambda_u": config.lambda_u,
            "n_locations": config.n_locations,
            "bias": bias,
            "rmse": rmse,
            "mad": mad,
            "rej_prob": rej_prob,
            "mc_se_bias": mc_se_bias,
            "mc_se_rmse": mc_se_rmse,
            "mc_se_mad": float(np.std(mads, ddof=1)),
            "mc_se_rej": mc_se_rej,
            "reps_used": used,
            "failures": len(failures),
            "failure_detail": "; ".join(failures[:3]),
        })
    return McReport(table=pd.DataFrame(rows), reps=reps, horizon=horizon, root_seed=seed)


CASES_SUITE = (
    # (policy_time, lambda_d, lambda_u, n_locations)
    (150, 40, 60, 250),
    (150, 60, 60, 250),
    (150, 80, 60, 250),
    (75, 40, 80, 250),
    (150, 40, 80, 250),
    (225, 40, 80, 250),
    (150, 40, 80, 1000),
)

ECON_SUITE = (
    (150, 40, 60, 250),
    (150, 60, 60, 250),
    (150, 80, 60, 250),
    (150, 40, 60, 1000),
    (150, 60, 60, 1000),
    (150, 80, 60, 1000),
)


def suite_config(policy_time: int, lambda_d: float, lambda_u: float, n_locations: int,
                 econ: bool, root_seed: int = 0) -> ScenarioConfig:
    """Baseline simulation design: null policy, heterogeneous first-case timing."""
    return ScenarioConfig(
        n_locations=n_locations,
        t_total=400,
        policy_time=policy_time,
        lambda_d=lambda_d,
        lambda_u=lambda_u,
        econ=EconParams() if econ else None,
        root_seed=root_seed,
    )


def table_suite(which: str, reps: int, seed: int = 0, horizon: int = 50,
                draws: int = 999, n_jobs: int = 1,
                options: EstimatorOptions = EstimatorOptions()) -> McReport:
    """Run the full scenario grid for cases or economic outcomes."""
    if which == "cases":
        grid, estimators, econ = CASES_SUITE, ("dr-cases", "did-cases"), False
    elif which == "econ":
        grid, estimators, econ = ECON_SUITE, ("adj-did-y", "std-did-y"), True
    else:
        raise ValueError("suite must be 'cases' or 'econ'")
    tables = []
    for row_idx, (policy_time, lam_d, lam_u, n_loc) in enumerate(grid):
        config = suite_config(policy_time, lam_d, lam_u, n_loc, econ,
                              root_seed=seed * 1000 + row_idx)
        report = run_scenario(config, estimators, reps, horizon=horizon, draws=draws,
                              options=options, n_jobs=n_jobs)
        tables.append(report.table)
    return McReport(table=pd.concat(tables, ignore_index=True), reps=reps,
                    horizon=horizon, root_seed=seed)
