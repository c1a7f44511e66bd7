"""Stochastic SIRD compartmental model: single-location transition system and paths."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class SirdError(ValueError):
    pass


@dataclass(frozen=True)
class SirdParams:
    """Per-period transition rates and the location population."""

    beta: float
    lam: float
    gamma: float
    n: int

    def __post_init__(self):
        if self.beta < 0 or self.lam < 0 or self.gamma < 0:
            raise SirdError("rates must be nonnegative")
        if self.lam + self.gamma > 1:
            raise SirdError(f"lam + gamma = {self.lam + self.gamma} exceeds 1")
        if self.n < 1:
            raise SirdError("population must be at least 1")


@dataclass(frozen=True)
class SirdState:
    """Integer compartment counts for one location at one period."""

    s: int
    i: int
    r: int
    d: int
    c: int

    def __post_init__(self):
        if min(self.s, self.i, self.r, self.d, self.c) < 0:
            raise SirdError("compartment counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.s + self.i + self.r + self.d

    def check(self, n: int) -> None:
        if self.n != n:
            raise SirdError(f"compartments sum to {self.n}, expected {n}")
        if self.c != n - self.s:
            raise SirdError("cumulative cases must equal population minus susceptibles")


@dataclass
class SirdPath:
    """One location's simulated trajectory over consecutive periods."""

    states: list[SirdState]
    first_case_time: int
    n: int

    def __len__(self) -> int:
        return len(self.states)

    def array(self) -> np.ndarray:
        """Stack the path into a (T, 5) int array with columns S, I, R, D, C."""
        return np.array([[st.s, st.i, st.r, st.d, st.c] for st in self.states], dtype=np.int64)


def expected_new_cases(state: SirdState, params: SirdParams) -> float:
    """Mean of the new-infection draw: beta * (I/N) * S."""
    return params.beta * state.i / params.n * state.s


def step(state: SirdState, params: SirdParams, rng: np.random.Generator) -> SirdState:
    """Advance one period.

    New infections are Poisson with mean beta*(I/N)*S, clamped at S so the
    population identity is preserved.  Outflows from I are a multinomial split
    into recoveries, deaths, and continuing infections, so they never exceed I.
    An all-clear state (I = 0) is absorbing and consumes no randomness.
    """
    if state.i == 0:
        return state
    new_cases = min(int(rng.poisson(expected_new_cases(state, params))), state.s)
    recovered, died, _ = rng.multinomial(
        state.i, [params.lam, params.gamma, 1.0 - params.lam - params.gamma]
    )
    return SirdState(
        s=state.s - new_cases,
        i=state.i + new_cases - recovered - died,
        r=state.r + recovered,
        d=state.d + died,
        c=state.c + new_cases,
    )


def simulate_path(
    params: SirdParams,
    t_total: int,
    first_case_time: int,
    initial_cases: int,
    rng: np.random.Generator,
    policy_time: int | None = None,
    post_policy_beta: float | None = None,
) -> SirdPath:
    """Simulate a path of length t_total, seeding the epidemic at first_case_time.

    When policy_time is given, transitions into periods t >= policy_time use
    post_policy_beta in place of params.beta.
    """
    if not 0 <= first_case_time < t_total:
        raise SirdError(f"first_case_time {first_case_time} outside [0, {t_total})")
    if initial_cases > params.n:
        raise SirdError(f"initial_cases {initial_cases} exceeds population {params.n}")

    pristine = SirdState(s=params.n, i=0, r=0, d=0, c=0)
    seeded = SirdState(
        s=params.n - initial_cases, i=initial_cases, r=0, d=0, c=initial_cases
    )
    post_params = params
    if policy_time is not None and post_policy_beta is not None:
        post_params = SirdParams(post_policy_beta, params.lam, params.gamma, params.n)

    states = [pristine] * first_case_time + [seeded]
    state = seeded
    for t in range(first_case_time + 1, t_total):
        active = post_params if (policy_time is not None and t >= policy_time) else params
        state = step(state, active, rng)
        states.append(state)
    return SirdPath(states=states, first_case_time=first_case_time, n=params.n)


def export_paths_csv(paths: dict[int, SirdPath], out_path) -> None:
    """Write paths as long-format CSV: location_id, t, S, I, R, D, C."""
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["location_id", "t", "S", "I", "R", "D", "C"])
        for loc_id, path in paths.items():
            for t, st in enumerate(path.states):
                writer.writerow([loc_id, t, st.s, st.i, st.r, st.d, st.c])
