"""Multi-location panel generation: treatment assignment, first-case timing, outcomes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .sird import SirdError, SirdParams, simulate_path

NEVER_TREATED = -1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EconParams:
    """Parameters of the economic-outcome process Y = tau_t + xi + alpha*I + noise."""

    alpha: float = -0.1
    tau_intercept: float = 50.0
    tau_slope: float = 20.0
    tau_periods: int = 400
    xi_mean_treated: float = 10.0
    xi_mean_untreated: float = 20.0
    xi_sd: float = 1.0
    noise_sd: float = 1.0

    def __post_init__(self):
        if self.noise_sd < 0 or self.xi_sd < 0:
            raise ConfigError("standard deviations must be nonnegative")

    def tau(self, t) -> np.ndarray:
        """Common time effect, a linear ramp over the configured span."""
        return self.tau_intercept + self.tau_slope * np.asarray(t, dtype=float) / self.tau_periods


@dataclass(frozen=True)
class ScenarioConfig:
    n_locations: int = 250
    sird: SirdParams = field(default_factory=lambda: SirdParams(0.08, 0.04, 0.003, 1000))
    t_total: int = 400
    treat_prob: float = 0.5
    policy_time: int = 150
    post_policy_beta: float = 0.08
    lambda_d: float = 40.0
    lambda_u: float = 80.0
    initial_cases: int = 10
    econ: EconParams | None = None
    root_seed: int = 0
    # staggered designs: adoption dates and their probabilities among treated
    adoption_times: tuple[int, ...] | None = None
    adoption_probs: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0 < self.treat_prob < 1:
            raise ConfigError("treat_prob must be strictly between 0 and 1")
        if not 1 < self.policy_time <= self.t_total:
            raise ConfigError("policy_time must be in (1, t_total]")
        if self.lambda_d >= self.t_total or self.lambda_u >= self.t_total:
            raise ConfigError("first-case means must be below t_total")
        if self.adoption_times is not None:
            if self.adoption_probs is None or len(self.adoption_probs) != len(self.adoption_times):
                raise ConfigError("adoption_times and adoption_probs must have equal length")
            if abs(sum(self.adoption_probs) - 1.0) > 1e-9:
                raise ConfigError("adoption_probs must sum to 1")

    @property
    def earliest_policy(self) -> int:
        if self.adoption_times is not None:
            return min(self.adoption_times)
        return self.policy_time


@dataclass
class Panel:
    """Rectangular locations-by-periods dataset with treatment group labels.

    group[l] is the adoption period for treated locations and NEVER_TREATED
    otherwise.  State arrays are (n_locations, t_total) ints; y is optional.
    """

    group: np.ndarray
    pop: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray
    d: np.ndarray
    c: np.ndarray
    y: np.ndarray | None = None
    covariates: np.ndarray | None = None
    covariate_names: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def n_locations(self) -> int:
        return self.s.shape[0]

    @property
    def t_total(self) -> int:
        return self.s.shape[1]

    @property
    def treated(self) -> np.ndarray:
        return self.group != NEVER_TREATED

    def validate(self) -> None:
        n, t = self.s.shape
        for name in ("i", "r", "d", "c"):
            if getattr(self, name).shape != (n, t):
                raise ConfigError(f"{name} array is not rectangular")
        if self.y is not None and self.y.shape != (n, t):
            raise ConfigError("y array is not rectangular")
        total = self.s + self.i + self.r + self.d
        if not np.array_equal(total, np.broadcast_to(self.pop[:, None], (n, t))):
            raise ConfigError("compartments do not sum to population")
        if np.any((self.group != NEVER_TREATED) & (self.group > t)):
            raise ConfigError("treated group labels must be adoption periods within the panel")

    def subset(self, keep: np.ndarray) -> "Panel":
        return Panel(
            group=self.group[keep],
            pop=self.pop[keep],
            s=self.s[keep],
            i=self.i[keep],
            r=self.r[keep],
            d=self.d[keep],
            c=self.c[keep],
            y=None if self.y is None else self.y[keep],
            covariates=None if self.covariates is None else self.covariates[keep],
            covariate_names=list(self.covariate_names),
            meta=dict(self.meta),
        )


def assign_treatment(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. Bernoulli(treat_prob) flags for each location."""
    return rng.random(config.n_locations) < config.treat_prob


def draw_first_case_time(is_treated: bool, config: ScenarioConfig, rng: np.random.Generator) -> int:
    """Poisson first-case period, clamped so every location has pre-policy history."""
    mean = config.lambda_d if is_treated else config.lambda_u
    draw = int(rng.poisson(mean))
    return min(draw, config.earliest_policy - 1)


def economic_outcome_path(
    i_path: np.ndarray, treated: bool, econ: EconParams, rng: np.random.Generator
) -> np.ndarray:
    """Outcome series Y_t = tau_t + xi + alpha * I_t + v_t for one location."""
    t_total = len(i_path)
    xi_mean = econ.xi_mean_treated if treated else econ.xi_mean_untreated
    xi = xi_mean + econ.xi_sd * rng.standard_normal()
    noise = econ.noise_sd * rng.standard_normal(t_total)
    return econ.tau(np.arange(t_total)) + xi + econ.alpha * i_path + noise


def build_panel(config: ScenarioConfig, t_simulate: int | None = None) -> Panel:
    """Simulate a full panel, deterministic given config.root_seed.

    t_simulate optionally shortens the simulated horizon (the process is
    Markov, so truncation does not change the law of the retained periods).
    """
    t_total = config.t_total if t_simulate is None else min(t_simulate, config.t_total)
    if t_total <= config.earliest_policy:
        raise ConfigError("simulated horizon must extend past the policy date")
    n = config.n_locations
    assign_rng = np.random.default_rng([config.root_seed, 0, 0x5EED])
    treated = assign_treatment(config, assign_rng)

    group = np.full(n, NEVER_TREATED, dtype=np.int64)
    if config.adoption_times is not None:
        dates = assign_rng.choice(config.adoption_times, size=n, p=config.adoption_probs)
        group[treated] = dates[treated]
    else:
        group[treated] = config.policy_time

    shape = (n, t_total)
    s = np.empty(shape, dtype=np.int64)
    i = np.empty(shape, dtype=np.int64)
    r = np.empty(shape, dtype=np.int64)
    d = np.empty(shape, dtype=np.int64)
    c = np.empty(shape, dtype=np.int64)
    y = np.empty(shape, dtype=float) if config.econ is not None else None

    for loc in range(n):
        loc_rng = np.random.default_rng([config.root_seed, 1, loc])
        first_case = draw_first_case_time(bool(treated[loc]), config, loc_rng)
        policy_time = int(group[loc]) if treated[loc] else None
        path = simulate_path(
            config.sird,
            t_total,
            first_case,
            config.initial_cases,
            loc_rng,
            policy_time=policy_time,
            post_policy_beta=config.post_policy_beta if treated[loc] else None,
        )
        arr = path.array()
        s[loc], i[loc], r[loc], d[loc], c[loc] = arr.T
        if y is not None:
            # dedicated stream so the outcome draws do not depend on how many
            # periods the epidemic path consumed
            econ_rng = np.random.default_rng([config.root_seed, 2, loc])
            y[loc] = economic_outcome_path(i[loc].astype(float), bool(treated[loc]), config.econ, econ_rng)

    panel = Panel(
        group=group,
        pop=np.full(n, config.sird.n, dtype=np.int64),
        s=s, i=i, r=r, d=d, c=c, y=y,
        meta={"root_seed": config.root_seed, "policy_time": config.earliest_policy},
    )
    panel.validate()
    return panel


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_INT_KEYS = {"n_locations", "population", "t_total", "policy_time", "initial_cases",
             "root_seed", "econ_tau_periods"}
_LIST_KEYS = {"adoption_times", "adoption_probs"}


def save_config(config: ScenarioConfig, path) -> None:
    """Write a flat key = value text file."""
    items = {
        "n_locations": config.n_locations,
        "beta": config.sird.beta,
        "lambda": config.sird.lam,
        "gamma": config.sird.gamma,
        "population": config.sird.n,
        "t_total": config.t_total,
        "treat_prob": config.treat_prob,
        "policy_time": config.policy_time,
        "post_policy_beta": config.post_policy_beta,
        "lambda_d": config.lambda_d,
        "lambda_u": config.lambda_u,
        "initial_cases": config.initial_cases,
        "root_seed": config.root_seed,
    }
    if config.adoption_times is not None:
        items["adoption_times"] = ",".join(str(v) for v in config.adoption_times)
        items["adoption_probs"] = ",".join(repr(v) for v in config.adoption_probs)
    if config.econ is not None:
        e = config.econ
        items.update({
            "econ_alpha": e.alpha,
            "econ_tau_intercept": e.tau_intercept,
            "econ_tau_slope": e.tau_slope,
            "econ_tau_periods": e.tau_periods,
            "econ_xi_mean_treated": e.xi_mean_treated,
            "econ_xi_mean_untreated": e.xi_mean_untreated,
            "econ_xi_sd": e.xi_sd,
            "econ_noise_sd": e.noise_sd,
        })
    with open(path, "w") as f:
        for k, v in items.items():
            f.write(f"{k} = {v}\n")


def load_config(path) -> ScenarioConfig:
    """Parse a flat key = value config file with line-level diagnostics."""
    raw: dict[str, str] = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()

    def pop(key, default=None, cast=float):
        if key not in raw:
            if default is None:
                raise ConfigError(f"{path}: missing required key {key!r}")
            return default
        value = raw.pop(key)
        try:
            return cast(value)
        except ValueError as exc:
            raise ConfigError(f"{path}: bad value for key {key!r}: {value!r}") from exc

    try:
        sird = SirdParams(
            beta=pop("beta", 0.08),
            lam=pop("lambda", 0.04),
            gamma=pop("gamma", 0.003),
            n=pop("population", 1000, int),
        )
    except SirdError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    t_total = pop("t_total", 400, int)

    econ = None
    if any(k.startswith("econ_") for k in raw):
        econ = EconParams(
            alpha=pop("econ_alpha", -0.1),
            tau_intercept=pop("econ_tau_intercept", 50.0),
            tau_slope=pop("econ_tau_slope", 20.0),
            tau_periods=pop("econ_tau_periods", t_total, int),
            xi_mean_treated=pop("econ_xi_mean_treated", 10.0),
            xi_mean_untreated=pop("econ_xi_mean_untreated", 20.0),
            xi_sd=pop("econ_xi_sd", 1.0),
            noise_sd=pop("econ_noise_sd", 1.0),
        )

    adoption_times = adoption_probs = None
    if "adoption_times" in raw:
        adoption_times = tuple(int(v) for v in raw.pop("adoption_times").split(","))
        adoption_probs = tuple(float(v) for v in raw.pop("adoption_probs").split(","))

    config = ScenarioConfig(
        n_locations=pop("n_locations", 250, int),
        sird=sird,
        t_total=t_total,
        treat_prob=pop("treat_prob", 0.5),
        policy_time=pop("policy_time", 150, int),
        post_policy_beta=pop("post_policy_beta", sird.beta),
        lambda_d=pop("lambda_d", 40.0),
        lambda_u=pop("lambda_u", 80.0),
        initial_cases=pop("initial_cases", 10, int),
        econ=econ,
        root_seed=pop("root_seed", 0, int),
        adoption_times=adoption_times,
        adoption_probs=adoption_probs,
    )
    if raw:
        raise ConfigError(f"{path}: unknown keys {sorted(raw)}")
    return config


def panel_to_frame(panel: Panel) -> pd.DataFrame:
    """Long-format frame: location_id, group, t, S, I, R, D, C, Y, pop, covariates."""
    n, t_total = panel.s.shape
    loc = np.repeat(np.arange(n), t_total)
    t = np.tile(np.arange(t_total), n)
    group = np.where(panel.group == NEVER_TREATED, "never", panel.group.astype(str))
    frame = pd.DataFrame({
        "location_id": loc,
        "group": np.repeat(group, t_total),
        "t": t,
        "S": panel.s.ravel(),
        "I": panel.i.ravel(),
        "R": panel.r.ravel(),
        "D": panel.d.ravel(),
        "C": panel.c.ravel(),
        "pop": np.repeat(panel.pop, t_total),
    })
    if panel.y is not None:
        frame["Y"] = panel.y.ravel()
    if panel.covariates is not None:
        for j, name in enumerate(panel.covariate_names):
            frame[name] = np.repeat(panel.covariates[:, j], t_total)
    return frame


def export_panel_csv(panel: Panel, path) -> None:
    panel_to_frame(panel).to_csv(path, index=False)


def import_panel_csv(path, covariate_names: list[str] | None = None) -> Panel:
    """Read the long-format panel CSV written by export_panel_csv."""
    frame = pd.read_csv(path, dtype={"group": str})
    required = {"location_id", "group", "t", "S", "I", "R", "D", "C", "pop"}
    missing = required - set(frame.columns)
    if missing:
        raise ConfigError(f"{path}: missing columns {sorted(missing)}")
    frame = frame.sort_values(["location_id", "t"])
    locs = frame["location_id"].unique()
    t_vals = np.sort(frame["t"].unique())
    n, t_total = len(locs), len(t_vals)
    if len(frame) != n * t_total:
        raise ConfigError(f"{path}: panel is not rectangular")

    def grid(col, dtype):
        values = frame[col].to_numpy(dtype=float).reshape(n, t_total)
        if dtype is np.int64 and np.all(values == np.round(values)):
            return values.astype(np.int64)
        return values

    per_loc = frame.groupby("location_id", sort=True).first()
    group = np.array(
        [NEVER_TREATED if g == "never" else int(float(g)) for g in per_loc["group"]],
        dtype=np.int64,
    )
    covariate_names = covariate_names or []
    covariates = None
    if covariate_names:
        covariates = per_loc[covariate_names].to_numpy(dtype=float)
    panel = Panel(
        group=group,
        pop=per_loc["pop"].to_numpy(dtype=np.int64),
        s=grid("S", np.int64), i=grid("I", np.int64), r=grid("R", np.int64),
        d=grid("D", np.int64), c=grid("C", np.int64),
        y=grid("Y", float) if "Y" in frame.columns else None,
        covariates=covariates,
        covariate_names=covariate_names,
    )
    return panel
