"""Ingestion and transforms for real location-by-day data: CSV loading,
per-million normalization, active-case windows, adoption-group binning."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .scenario import NEVER_TREATED, Panel

DEFAULT_SCHEMA = {
    "location": "location",
    "date": "date",
    "cum_cases": "cum_cases",
    "cum_tests": "cum_tests",
    "population": "population",
    "outcome": "outcome",
    "region": "region",
    "policy_date": "policy_date",
}

REQUIRED = ("location", "date", "cum_cases", "population")
COUNT_COLUMNS = ("cum_cases", "cum_tests")


class SchemaError(ValueError):
    pass


class DateGapError(ValueError):
    pass


class NonMonotoneWarning(UserWarning):
    pass


@dataclass
class RawSeries:
    """Validated per-(location, date) data with canonical column names."""

    frame: pd.DataFrame
    normalized: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def locations(self) -> list:
        return list(self.frame["location"].unique())


def load_panel_csv(path, schema: dict | None = None) -> RawSeries:
    """Load and validate a raw CSV, renaming columns per the schema mapping.

    Requires contiguous daily dates per location and positive populations.
    """
    mapping = dict(DEFAULT_SCHEMA)
    if schema:
        mapping.update(schema)
    frame = pd.read_csv(path)
    rename = {}
    for logical, actual in mapping.items():
        if actual in frame.columns:
            rename[actual] = logical
    missing = [mapping[k] for k in REQUIRED if mapping[k] not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing required column(s) {missing}")
    frame = frame.rename(columns=rename)
    frame["date"] = pd.to_datetime(frame["date"])
    frame = frame.sort_values(["location", "date"]).reset_index(drop=True)

    if (frame["population"] <= 0).any():
        bad = frame.loc[frame["population"] <= 0, "location"].unique()
        raise SchemaError(f"{path}: nonpositive population for {list(bad)}")

    gaps = []
    for loc, sub in frame.groupby("location"):
        dates = sub["date"]
        expected = pd.date_range(dates.min(), dates.max(), freq="D")
        missing_dates = expected.difference(dates)
        gaps.extend((loc, d.date().isoformat()) for d in missing_dates)
    if gaps:
        raise DateGapError(f"{path}: missing dates {gaps[:20]}" +
                           (f" (+{len(gaps) - 20} more)" if len(gaps) > 20 else ""))
    return RawSeries(frame=frame)


def per_million(series: RawSeries) -> RawSeries:
    """Scale count variables to per-million-persons units.  Not idempotent: a
    second application is refused via the normalized flag."""
    if series.normalized:
        raise ValueError("series already normalized to per-million units")
    frame = series.frame.copy()
    factor = 1e6 / frame["population"]
    for col in COUNT_COLUMNS:
        if col in frame.columns:
            frame[col] = frame[col] * factor
    return RawSeries(frame=frame, normalized=True, meta=dict(series.meta))


def active_cases(cumulative: np.ndarray, window: int) -> np.ndarray:
    """Active cases as the sum of the last `window` daily increments.

    Negative daily increments (data revisions) are clamped to zero; the clamp
    count is reported via a warning.  Accepts a 1-d series or a 2-d
    (locations, days) array.
    """
    c = np.atleast_2d(np.asarray(cumulative, dtype=float))
    increments = np.diff(c, axis=1, prepend=c[:, :1] * 0)
    increments[:, 0] = c[:, 0]  # everything before the sample start counts as day 0
    negatives = increments < 0
    if negatives.any():
        warnings.warn(
            f"clamped {int(negatives.sum())} negative daily increments to zero",
            NonMonotoneWarning,
        )
        increments = np.clip(increments, 0.0, None)
    clean = np.cumsum(increments, axis=1)
    shifted = np.zeros_like(clean)
    if clean.shape[1] > window:
        shifted[:, window:] = clean[:, :-window]
    active = clean - shifted
    return active[0] if np.asarray(cumulative).ndim == 1 else active


def assign_groups(policy_dates: pd.DataFrame, window: int, anchor=None) -> pd.Series:
    """Bucket adoption dates into consecutive half-open window-day bins.

    policy_dates needs columns location and policy_date (blank/NaT means no
    adoption).  Bins are [anchor + k*window, anchor + (k+1)*window); the label
    is the bin's start date.  Returns a location-indexed series of bin start
    dates, with NaT for never-adopters.
    """
    dates = pd.to_datetime(policy_dates["policy_date"], errors="coerce")
    out = pd.Series(pd.NaT, index=policy_dates["location"].values, dtype="datetime64[ns]")
    adopted = dates.notna().values
    if not adopted.any():
        return out
    anchor = pd.to_datetime(anchor) if anchor is not None else dates[adopted].min()
    offsets = (dates[adopted] - anchor).dt.days // window
    out.iloc[np.flatnonzero(adopted)] = (anchor + pd.to_timedelta(offsets * window, unit="D")).values
    return out


def to_analysis_panel(series: RawSeries, window: int = 5,
                      policy_dates: pd.DataFrame | None = None,
                      anchor=None) -> Panel:
    """Convert a raw series to the estimation panel.

    Periods are days since the earliest date.  Active cases use the trailing
    window; susceptibles are population (in analysis units) minus cumulative
    cases.  Testing totals and region dummies, when present, become static
    conditioning covariates measured the day before the earliest adoption.
    """
    frame = series.frame
    locs = list(frame["location"].unique())
    start = frame["date"].min()
    t_total = int((frame["date"].max() - start).days) + 1
    n = len(locs)

    c = np.zeros((n, t_total))
    tests = np.zeros((n, t_total)) if "cum_tests" in frame.columns else None
    y = np.zeros((n, t_total)) if "outcome" in frame.columns else None
    pop_units = np.zeros(n)
    for idx, loc in enumerate(locs):
        sub = frame[frame["location"] == loc]
        t = ((sub["date"] - start).dt.days).to_numpy()
        c[idx, t] = sub["cum_cases"].to_numpy()
        if tests is not None:
            tests[idx, t] = sub["cum_tests"].to_numpy()
        if y is not None:
            y[idx, t] = sub["outcome"].to_numpy()
        pop_units[idx] = 1e6 if series.normalized else sub["population"].iloc[0]

    i = active_cases(c, window)
    s = pop_units[:, None] - c

    group = np.full(n, NEVER_TREATED, dtype=np.int64)
    if policy_dates is not None:
        bins = assign_groups(policy_dates, window, anchor=anchor)
        for idx, loc in enumerate(locs):
            if loc in bins.index and pd.notna(bins.loc[loc]):
                group[idx] = int((bins.loc[loc] - start).days)

    covariates = []
    covariate_names = []
    earliest = int(group[group != NEVER_TREATED].min()) if (group != NEVER_TREATED).any() else t_total
    base = max(earliest - 1, 0)
    if tests is not None:
        covariates.append(tests[:, base])
        covariate_names.append("tests_base")
    if "region" in frame.columns:
        regions = frame.groupby("location", sort=False)["region"].first().reindex(locs)
        for value in sorted(regions.dropna().unique())[1:]:  # reference category dropped
            covariates.append((regions == value).to_numpy(dtype=float))
            covariate_names.append(f"region_{value}")

    panel = Panel(
        group=group,
        pop=pop_units,
        s=s, i=i, r=np.zeros_like(c), d=np.zeros_like(c), c=c,
        y=y,
        covariates=np.column_stack(covariates) if covariates else None,
        covariate_names=covariate_names,
        meta={"locations": locs, "start_date": str(start.date()), "window": window,
              "policy_time": earliest},
    )
    return panel
