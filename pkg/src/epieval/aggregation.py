"""Group-time effects for staggered adoption and event-study / overall summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .estimate import EstimatorOptions, estimate_series
from .inference import AttSeries, multiplier_bootstrap
from .scenario import NEVER_TREATED, Panel


@dataclass
class GroupTimeCell:
    group: int
    period: int
    estimate: float
    influence: np.ndarray  # full-panel length


@dataclass
class GroupTimeGrid:
    """Estimates indexed by adoption group g and period t >= g."""

    cells: dict[tuple[int, int], GroupTimeCell]
    missing: list[tuple[int, int]]
    group_sizes: dict[int, int]
    group_pops: dict[int, float]
    group_members: dict[int, np.ndarray]
    n_locations: int

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"g": g, "t": t, "e": t - g, "estimate": cell.estimate}
            for (g, t), cell in sorted(self.cells.items())
        ]
        return pd.DataFrame(rows)


def group_time_att(
    panel: Panel,
    estimator: str = "dr-cases",
    horizon: int | None = None,
    options: EstimatorOptions = EstimatorOptions(),
    comparison: str = "notyet",
) -> GroupTimeGrid:
    """Run the chosen estimator group by group.

    For adoption group g at period t, the treated set is group g and the
    comparison set is never-treated locations plus, when comparison="notyet",
    locations not yet treated at t.  Cells without any valid comparison are
    flagged missing rather than fabricated.
    """
    if comparison not in ("notyet", "never"):
        raise ValueError("comparison must be 'notyet' or 'never'")
    groups = np.unique(panel.group[panel.treated])
    never = panel.group == NEVER_TREATED
    if len(groups) < 2 and not never.any():
        raise ValueError("need at least two adoption groups or a never-treated group")

    n = panel.n_locations
    cells: dict[tuple[int, int], GroupTimeCell] = {}
    missing: list[tuple[int, int]] = []
    group_sizes = {int(g): int((panel.group == g).sum()) for g in groups}
    group_pops = {int(g): float(panel.pop[panel.group == g].sum()) for g in groups}
    group_members = {int(g): panel.group == g for g in groups}

    for g in groups:
        g = int(g)
        last = panel.t_total - 1
        if horizon is not None:
            last = min(last, g + horizon - 1)
        in_group = panel.group == g
        for t in range(g, last + 1):
            if comparison == "notyet":
                comparators = never | (panel.group > t)
            else:
                comparators = never
            keep = in_group | comparators
            if not comparators.any():
                missing.append((g, t))
                continue
            sub = panel.subset(keep)
            sub.meta["policy_time"] = g
            # comparison locations are untreated for this cell's purposes
            sub.group = np.where(sub.group == g, g, NEVER_TREATED)
            try:
                series = estimate_series(sub, estimator, policy_time=g, options=options,
                                         periods=[t])
            except ValueError:
                missing.append((g, t))
                continue
            infl = np.zeros(n)
            infl[keep] = series.influence[:, 0] * (n / keep.sum())
            cells[(g, t)] = GroupTimeCell(group=g, period=t,
                                          estimate=float(series.estimates[0]), influence=infl)
    return GroupTimeGrid(cells=cells, missing=missing, group_sizes=group_sizes,
                         group_pops=group_pops, group_members=group_members, n_locations=n)


def event_study(grid: GroupTimeGrid, weight_by_population: bool = False) -> AttSeries:
    """Aggregate the grid to event time e = t - g with group-size weights.

    Weights are treated-location counts (or, optionally, populations) of the
    groups observed at each horizon.  Count weights are sample shares, so their
    sampling variation is chained into the influence functions.
    """
    if not grid.cells:
        raise ValueError("empty grid")
    events = sorted({t - g for (g, t) in grid.cells})
    n = grid.n_locations
    estimates = np.empty(len(events))
    influence = np.zeros((n, len(events)))
    sizes = grid.group_pops if weight_by_population else grid.group_sizes
    for k, e in enumerate(events):
        members = [(g, grid.cells[(g, g + e)]) for g in sorted(grid.group_sizes)
                   if (g, g + e) in grid.cells]
        total = sum(sizes[g] for g, _ in members)
        weights = {g: sizes[g] / total for g, _ in members}
        est = sum(weights[g] * cell.estimate for g, cell in members)
        estimates[k] = est
        infl = np.zeros(n)
        for g, cell in members:
            infl += weights[g] * cell.influence
        if not weight_by_population and len(members) > 1:
            # count weights are ratios of group-indicator sample means; chain
            # their estimation effect via the delta method
            eligible = np.zeros(n)
            for g, _ in members:
                eligible += grid.group_members[g].astype(float)
            denom = eligible.mean()
            for g, cell in members:
                share_infl = (grid.group_members[g].astype(float) - weights[g] * eligible) / denom
                infl += cell.estimate * share_infl
        influence[:, k] = infl
    return AttSeries(periods=np.array(events), estimates=estimates, influence=influence,
                     index_name="e", meta={"weight_by_population": weight_by_population})


def overall_att(series: AttSeries, horizon: int, draws: int = 999,
                rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Unweighted mean of the event study over e = 0..horizon-1, with bootstrap SE."""
    mask = (series.periods >= 0) & (series.periods < horizon)
    if mask.sum() == 0:
        raise ValueError("no event times within the requested horizon")
    if horizon > int(series.periods.max()) + 1:
        raise ValueError("horizon exceeds available post periods")
    estimate = float(series.estimates[mask].mean())
    infl = series.influence[:, mask].mean(axis=1)
    se, _ = multiplier_bootstrap(infl[:, None], draws=draws, rng=rng)
    return estimate, float(se[0])
