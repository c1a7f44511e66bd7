#!/usr/bin/env python3
"""Generate the bundled synthetic state-level panel at data/synthetic_states.csv.

The file mimics a real early-2020 application table: one row per state-day with
cumulative cases and tests, population, a weekly-claims-style economic outcome,
a census region, and a (possibly blank) policy adoption date.  Everything is
drawn from a fixed seed so the bundled file is reproducible.
"""

import argparse
from pathlib import Path

import numpy as np
import pandas as pd

REGIONS = ("northeast", "midwest", "south", "west")


def make_frame(n_states: int = 45, n_days: int = 130, seed: int = 20200215) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    start = pd.Timestamp("2020-02-15")
    dates = pd.date_range(start, periods=n_days, freq="D")
    rows = []
    for k in range(n_states):
        name = f"state_{k:02d}"
        region = REGIONS[k % len(REGIONS)]
        population = int(rng.uniform(0.6, 40.0) * 1e6)

        # logistic-style cumulative incidence with noisy daily increments
        onset = rng.uniform(10, 45)
        growth = rng.uniform(0.12, 0.25)
        ceiling = population * rng.uniform(0.002, 0.02)
        t = np.arange(n_days)
        mean_cum = ceiling / (1.0 + np.exp(-growth * (t - onset - 25)))
        mean_inc = np.clip(np.diff(mean_cum, prepend=0.0), 0.0, None)
        cum_cases = np.cumsum(rng.poisson(mean_inc))

        # testing ramps up over time roughly proportionally to cases
        test_rate = rng.uniform(8, 25)
        cum_tests = np.cumsum(rng.poisson(test_rate * (mean_inc + 5.0)))

        # economic outcome: claims index rising with active infections
        active = cum_cases - np.concatenate([np.zeros(7), cum_cases[:-7]])
        outcome = (100.0 + rng.normal(0, 0.5)
                   + 2.0 * active / max(active.max(), 1.0) * rng.uniform(2, 6)
                   + rng.normal(0, 0.3, n_days))

        # ~80% of states adopt, mostly mid-March to early April
        if rng.random() < 0.8:
            adopt = start + pd.Timedelta(days=int(rng.uniform(32, 56)))
            policy_date = adopt.date().isoformat()
        else:
            policy_date = ""

        for day_idx, date in enumerate(dates):
            rows.append({
                "location": name,
                "date": date.date().isoformat(),
                "cum_cases": int(cum_cases[day_idx]),
                "cum_tests": int(cum_tests[day_idx]),
                "population": population,
                "outcome": round(float(outcome[day_idx]), 4),
                "region": region,
                "policy_date": policy_date,
            })
    return pd.DataFrame(rows)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                             / "data" / "synthetic_states.csv"))
    parser.add_argument("--seed", type=int, default=20200215)
    args = parser.parse_args()
    frame = make_frame(seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False)
    print(f"wrote {out} ({frame['location'].nunique()} states x "
          f"{frame['date'].nunique()} days)")


if __name__ == "__main__":
    main()
