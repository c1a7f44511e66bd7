"""Estimators for policy effects on an outside outcome that also responds to
active cases: standard long-difference contrast, regression adjustment for
observed cases, and the adjusted variant that replaces observed treated cases
with their estimated no-policy path."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cases import (
    EmptyGroupError,
    OutcomeModel,
    PropensityModel,
    _ratio_influence,
    att_did_cases,
    att_dr_cases,
)
from .scenario import Panel


class CollinearityError(ValueError):
    pass


@dataclass
class EconFit:
    """Per-period slope/intercept of the untreated outcome-path regression.

    tau_tilde[t] is the common time effect relative to the base period and
    alpha[t] the marginal effect of one active case on the outcome; influence
    holds the (n, 2) coefficient influence contributions per period.
    """

    periods: np.ndarray
    tau_tilde: np.ndarray
    alpha: np.ndarray
    influence: dict[int, np.ndarray]
    resid_sd: np.ndarray
    base_period: int
    pooled: bool = False

    def at(self, t: int) -> tuple[float, float, np.ndarray]:
        idx = int(np.flatnonzero(self.periods == t)[0])
        return float(self.tau_tilde[idx]), float(self.alpha[idx]), self.influence[int(t)]


def fit_tau_alpha(panel: Panel, t: int, base_period: int | None = None) -> tuple[float, float]:
    """Regress the untreated outcome path on the untreated active-case path.

    The intercept is the common time effect relative to the base period (unit
    fixed effects difference out of the long difference); the slope is the
    per-case effect on the outcome.
    """
    tau, alpha, _, _ = _fit_tau_alpha_full(panel, t, base_period)
    return tau, alpha


def _fit_tau_alpha_full(panel: Panel, t: int, base_period: int | None):
    base = panel.meta.get("policy_time", 0) - 1 if base_period is None else base_period
    if panel.y is None:
        raise ValueError("panel has no economic outcome")
    untreated = ~panel.treated
    if untreated.sum() < 3:
        raise EmptyGroupError("need at least 3 untreated locations")
    dy = panel.y[:, t] - panel.y[:, base]
    di = (panel.i[:, t] - panel.i[:, base]).astype(float)
    if np.var(di[untreated]) < 1e-12:
        raise CollinearityError("active-case path is constant across untreated locations")
    x = np.column_stack([np.ones(panel.n_locations), di])
    mask = untreated.astype(float)
    m = (x * mask[:, None]).T @ x / panel.n_locations
    coef = np.linalg.solve(m, (x * mask[:, None]).T @ dy / panel.n_locations)
    resid = dy - x @ coef
    # coefficient influence: psi_l = M^{-1} x_l e_l (1-D_l), stacked (n, 2)
    infl = (np.linalg.inv(m) @ (x * (mask * resid)[:, None]).T).T
    resid_sd = float(np.std(resid[untreated], ddof=2)) if untreated.sum() > 2 else 0.0
    return float(coef[0]), float(coef[1]), infl, resid_sd


def fit_econ(panel: Panel, periods, base_period: int | None = None, pooled: bool = False) -> EconFit:
    """Fit the untreated path regression for every requested period."""
    base = panel.meta.get("policy_time", 0) - 1 if base_period is None else base_period
    periods = np.asarray(list(periods), dtype=int)
    tau = np.empty(len(periods))
    alpha = np.empty(len(periods))
    resid_sd = np.empty(len(periods))
    influence: dict[int, np.ndarray] = {}
    for k, t in enumerate(periods):
        tau[k], alpha[k], influence[int(t)], resid_sd[k] = _fit_tau_alpha_full(panel, int(t), base)
    fit = EconFit(periods=periods, tau_tilde=tau, alpha=alpha, influence=influence,
                  resid_sd=resid_sd, base_period=base, pooled=pooled)
    if pooled:
        _pool_alpha(panel, fit)
    return fit


def _pool_alpha(panel: Panel, fit: EconFit) -> None:
    """Replace per-period slopes with one slope from stacking all post periods."""
    untreated = ~panel.treated
    base = fit.base_period
    di_all, dy_all = [], []
    for t in fit.periods:
        di_all.append((panel.i[untreated, t] - panel.i[untreated, base]).astype(float))
        dy_all.append(panel.y[untreated, t] - panel.y[untreated, base])
    di = np.concatenate(di_all)
    dy = np.concatenate(dy_all)
    # period intercepts absorb tau_tilde; demean within period
    k = len(fit.periods)
    di_dm = di - np.repeat([seg.mean() for seg in di_all], [len(s) for s in di_all])
    dy_dm = dy - np.repeat([seg.mean() for seg in dy_all], [len(s) for s in dy_all])
    denom = float(di_dm @ di_dm)
    if denom < 1e-12:
        raise CollinearityError("pooled active-case paths are constant")
    alpha = float(di_dm @ dy_dm / denom)
    for idx, t in enumerate(fit.periods):
        fit.tau_tilde[idx] = dy_all[idx].mean() - alpha * di_all[idx].mean()
    fit.alpha[:] = alpha


@dataclass
class CounterfactualInfections:
    """Estimated mean no-policy change in active cases among treated locations."""

    value: float
    influence: np.ndarray
    observed_treated_delta: float
    att_i: float
    att_i_influence: np.ndarray


def counterfactual_infections(
    panel: Panel,
    t: int,
    pscore: PropensityModel,
    outcome_model_i: OutcomeModel,
    base_period: int | None = None,
) -> CounterfactualInfections:
    """Observed treated active-case path minus the estimated policy effect on it."""
    base = panel.meta.get("policy_time", 0) - 1 if base_period is None else base_period
    d = panel.treated.astype(float)
    if d.sum() == 0:
        raise EmptyGroupError("no treated locations")
    di = (panel.i[:, t] - panel.i[:, base]).astype(float)
    observed, inf_obs = _ratio_influence(d * di, d)
    att_i, inf_att = att_dr_cases(panel, t, pscore, outcome_model_i, base, outcome_var="i")
    return CounterfactualInfections(
        value=observed - att_i,
        influence=inf_obs - inf_att,
        observed_treated_delta=observed,
        att_i=att_i,
        att_i_influence=inf_att,
    )


def _treated_outcome_path(panel: Panel, t: int, base: int) -> tuple[float, np.ndarray]:
    d = panel.treated.astype(float)
    dy = panel.y[:, t] - panel.y[:, base]
    return _ratio_influence(d * dy, d)


def att_y_adjusted(
    panel: Panel,
    t: int,
    econ_fit: EconFit,
    counterfactual: CounterfactualInfections,
    base_period: int | None = None,
) -> tuple[float, np.ndarray]:
    """Treated outcome path minus the time effect and the per-case effect applied
    to the estimated no-policy case path.  Influence chains all three steps."""
    base = econ_fit.base_period if base_period is None else base_period
    tau, alpha, coef_infl = econ_fit.at(t)
    path, inf_path = _treated_outcome_path(panel, t, base)
    att = path - (tau + alpha * counterfactual.value)
    infl = (
        inf_path
        - coef_infl[:, 0]
        - counterfactual.value * coef_infl[:, 1]
        - alpha * counterfactual.influence
    )
    return float(att), infl


def att_y_standard_did(panel: Panel, t: int, base_period: int | None = None) -> tuple[float, np.ndarray]:
    """Plain long-difference contrast on the economic outcome."""
    return att_did_cases(panel, t, base_period, outcome_var="y")


def att_y_regression_did(
    panel: Panel, t: int, econ_fit: EconFit, base_period: int | None = None
) -> tuple[float, np.ndarray]:
    """Adjusts for the observed treated case path, ignoring that the policy may
    have moved that path."""
    base = econ_fit.base_period if base_period is None else base_period
    tau, alpha, coef_infl = econ_fit.at(t)
    d = panel.treated.astype(float)
    di = (panel.i[:, t] - panel.i[:, base]).astype(float)
    observed, inf_obs = _ratio_influence(d * di, d)
    path, inf_path = _treated_outcome_path(panel, t, base)
    att = path - (tau + alpha * observed)
    infl = (
        inf_path
        - coef_infl[:, 0]
        - observed * coef_infl[:, 1]
        - alpha * inf_obs
    )
    return float(att), infl
