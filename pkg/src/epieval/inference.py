"""Multiplier-bootstrap standard errors, pointwise and uniform bands, z-tests."""

from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd


class DegenerateColumnWarning(UserWarning):
    pass


@dataclass
class AttSeries:
    """Estimated effects over periods (or event times) with influence accounting.

    influence is an (n_locations, n_periods) matrix of per-location
    contributions; each column has sample mean ~ 0.
    """

    periods: np.ndarray
    estimates: np.ndarray
    influence: np.ndarray
    se: np.ndarray | None = None
    uniform_crit: float | None = None
    level: float = 0.95
    index_name: str = "t"
    meta: dict = field(default_factory=dict)

    @property
    def n_locations(self) -> int:
        return self.influence.shape[0]

    def band(self, uniform: bool = True) -> tuple[np.ndarray, np.ndarray]:
        if self.se is None:
            raise ValueError("run attach_inference before requesting bands")
        crit = self.uniform_crit if uniform else pointwise_crit(self.level)
        return self.estimates - crit * self.se, self.estimates + crit * self.se

    def to_frame(self, uniform: bool = True) -> pd.DataFrame:
        lo, hi = self.band(uniform=uniform)
        frame = pd.DataFrame({
            self.index_name: self.periods,
            "estimate": self.estimates,
            "se": self.se,
            "band_lo": lo,
            "band_hi": hi,
        })
        for key in ("n_treated", "n_untreated", "n_dropped"):
            if key in self.meta:
                frame[key] = self.meta[key]
        return frame


def pointwise_crit(level: float) -> float:
    return float(_norm_ppf(0.5 + level / 2.0))


def _norm_ppf(q: float) -> float:
    return statistics.NormalDist().inv_cdf(q)


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def multiplier_bootstrap(
    influence: np.ndarray,
    draws: int = 999,
    level: float = 0.95,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, float]:
    """Rademacher multiplier bootstrap over the rows of an influence matrix.

    Returns per-column standard errors (bootstrap IQR / 1.349, robust to heavy
    tails) and the sup-t critical value for uniform bands at the given level.
    """
    if draws < 100:
        raise ValueError("need at least 100 bootstrap draws")
    influence = np.atleast_2d(np.asarray(influence, dtype=float))
    if influence.ndim == 1:
        influence = influence[:, None]
    n = influence.shape[0]
    if n < 10:
        raise ValueError("need at least 10 locations for the bootstrap")
    rng = rng or np.random.default_rng()

    multipliers = rng.choice([-1.0, 1.0], size=(draws, n))
    perturbed = multipliers @ influence / n  # (draws, n_periods)

    q25, q75 = np.percentile(perturbed, [25, 75], axis=0)
    se = (q75 - q25) / (2.0 * _norm_ppf(0.75))

    live = se > 0
    if not live.all():
        warnings.warn("degenerate influence column: band width is zero", DegenerateColumnWarning)
    if live.any():
        t_stats = np.abs(perturbed[:, live]) / se[live]
        sup_t = t_stats.max(axis=1)
        crit = float(np.quantile(sup_t, level))
        crit = max(crit, pointwise_crit(level))
    else:
        crit = pointwise_crit(level)
    return se, crit


def attach_inference(
    att: AttSeries, draws: int = 999, level: float = 0.95, rng: np.random.Generator | None = None
) -> AttSeries:
    se, crit = multiplier_bootstrap(att.influence, draws=draws, level=level, rng=rng)
    att.se = se
    att.uniform_crit = crit
    att.level = level
    return att


def test_zero(att: AttSeries) -> dict:
    """Two-sided per-period z-tests and a sup-t joint test of a zero path."""
    if att.se is None:
        raise ValueError("run attach_inference before testing")
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(att.se > 0, att.estimates / att.se, np.where(att.estimates == 0, 0.0, np.inf))
    pointwise = np.array([2.0 * _norm_sf(abs(v)) if np.isfinite(v) else 0.0 for v in z])
    pointwise = np.minimum(pointwise, 1.0)
    sup = np.max(np.abs(z[np.isfinite(z)])) if np.any(np.isfinite(z)) else 0.0
    joint_reject = bool(sup > (att.uniform_crit or pointwise_crit(att.level)))
    return {"z": z, "p_pointwise": pointwise, "sup_t": float(sup), "joint_reject": joint_reject}
