"""Single-policy-date estimation driver: turns a panel plus an estimator name
into an effect series with full-panel influence accounting."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cases import (
    FeatureMap,
    OutcomeModel,
    PreTreatmentState,
    att_did_cases,
    att_dr_cases,
    att_ipw_cases,
    att_ra_cases,
    fit_propensity,
    trim_overlap,
)
from .econ import (
    att_y_adjusted,
    att_y_regression_did,
    att_y_standard_did,
    counterfactual_infections,
    fit_econ,
)
from .inference import AttSeries
from .scenario import Panel

CASE_ESTIMATORS = ("did-cases", "dr-cases", "ipw-cases", "ra-cases")
ECON_ESTIMATORS = ("std-did-y", "reg-did-y", "adj-did-y")
ALL_ESTIMATORS = CASE_ESTIMATORS + ECON_ESTIMATORS


@dataclass(frozen=True)
class EstimatorOptions:
    degree: int = 3
    include_interactions: bool = True
    include_susceptible: bool = True
    covariates: tuple[str, ...] = ()
    trim_cap: float | None = None
    symmetric_trim: bool = False
    pooled_alpha: bool = False

    def feature_map(self) -> FeatureMap:
        return FeatureMap(
            degree=self.degree,
            include_interactions=self.include_interactions,
            covariate_names=self.covariates,
            include_susceptible=self.include_susceptible,
        )


def _needs_pscore(estimator: str) -> bool:
    return estimator in ("dr-cases", "ipw-cases", "adj-did-y")


def _needs_outcome_model(estimator: str) -> bool:
    return estimator in ("dr-cases", "ra-cases", "adj-did-y")


def estimate_series(
    panel: Panel,
    estimator: str,
    policy_time: int | None = None,
    horizon: int | None = None,
    options: EstimatorOptions = EstimatorOptions(),
    periods=None,
) -> AttSeries:
    """Estimate period-by-period policy effects for a single adoption date.

    Influence contributions are reported on the full input panel (zero rows for
    trimmed locations, remaining rows rescaled) so that series from different
    samples can be aggregated and bootstrapped jointly.
    """
    if estimator not in ALL_ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; choose from {ALL_ESTIMATORS}")
    if policy_time is None:
        treated_groups = np.unique(panel.group[panel.treated])
        if len(treated_groups) != 1:
            raise ValueError("panel has multiple adoption dates; give policy_time explicitly")
        policy_time = int(treated_groups[0])
    base = policy_time - 1
    if periods is None:
        last = panel.t_total - 1
        if horizon is not None:
            last = min(last, policy_time + horizon - 1)
        periods = np.arange(policy_time, last + 1)
    else:
        periods = np.asarray(list(periods), dtype=int)

    n_full = panel.n_locations
    work = panel
    dropped = np.array([], dtype=int)
    feature_map = options.feature_map()

    pscore = None
    if _needs_pscore(estimator):
        state = PreTreatmentState.from_panel(work, base)
        pscore = fit_propensity(feature_map.build(state), work.treated, feature_map)
        if options.trim_cap is not None:
            work, dropped = trim_overlap(
                work, pscore, cap=options.trim_cap, base_period=base,
                symmetric=options.symmetric_trim,
            )
            state = PreTreatmentState.from_panel(work, base)
            pscore = fit_propensity(feature_map.build(state), work.treated, feature_map)

    outcome_c = outcome_i = None
    if _needs_outcome_model(estimator):
        state = PreTreatmentState.from_panel(work, base)
        untreated = ~work.treated
        if estimator in ("dr-cases", "ra-cases"):
            outcome_c = OutcomeModel.fit_periods(feature_map, state, work.c, untreated, periods)
        if estimator == "adj-did-y":
            outcome_i = OutcomeModel.fit_periods(feature_map, state, work.i, untreated, periods)

    econ_fit = None
    if estimator in ("reg-did-y", "adj-did-y"):
        econ_fit = fit_econ(work, periods, base_period=base, pooled=options.pooled_alpha)

    keep = np.setdiff1d(np.arange(n_full), dropped)
    scale = n_full / len(keep)
    estimates = np.empty(len(periods))
    influence = np.zeros((n_full, len(periods)))
    diagnostics = []
    for k, t in enumerate(periods):
        t = int(t)
        if estimator == "did-cases":
            att, infl = att_did_cases(work, t, base)
        elif estimator == "dr-cases":
            att, infl = att_dr_cases(work, t, pscore, outcome_c, base)
        elif estimator == "ipw-cases":
            att, infl = att_ipw_cases(work, t, pscore, base)
        elif estimator == "ra-cases":
            att, infl = att_ra_cases(work, t, outcome_c, base)
        elif estimator == "std-did-y":
            att, infl = att_y_standard_did(work, t, base)
        elif estimator == "reg-did-y":
            att, infl = att_y_regression_did(work, t, econ_fit, base)
        else:  # adj-did-y
            cf = counterfactual_infections(work, t, pscore, outcome_i, base)
            att, infl = att_y_adjusted(work, t, econ_fit, cf, base)
            tau, alpha, _ = econ_fit.at(t)
            diagnostics.append((t, alpha, tau, cf.att_i))
        estimates[k] = att
        influence[keep, k] = infl * scale

    meta = {
        "estimator": estimator,
        "policy_time": policy_time,
        "n_treated": int(work.treated.sum()),
        "n_untreated": int((~work.treated).sum()),
        "n_dropped": int(len(dropped)),
        "dropped": dropped.tolist(),
        "options": options,
    }
    if pscore is not None:
        meta["pscore_converged"] = pscore.converged
        meta["pscore_separation"] = pscore.fit.separation
    if diagnostics:
        meta["econ_diagnostics"] = diagnostics
    return AttSeries(periods=periods, estimates=estimates, influence=influence, meta=meta)
