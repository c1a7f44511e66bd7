"""Command-line front end: simulate panels, run replication suites, estimate
effects on panel files, and emit plot-ready outputs."""

from __future__ import annotations

import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .aggregation import event_study, group_time_att
from .estimate import ALL_ESTIMATORS, EstimatorOptions, estimate_series
from .inference import attach_inference
from .montecarlo import table_suite
from .scenario import (
    ConfigError,
    build_panel,
    export_panel_csv,
    import_panel_csv,
    load_config,
)


def write_manifest(out_dir: Path, command: str, config_items: dict, outputs, started: float) -> None:
    """Atomic key-value manifest written alongside every output set."""
    lines = [
        f"command = {command}",
        f"tool_version = {__version__}",
        f"wall_clock_s = {time.time() - started:.2f}",
    ]
    for key, value in config_items.items():
        lines.append(f"config.{key} = {value}")
    for path in outputs:
        lines.append(f"output = {path}")
    tmp = out_dir / ".manifest.tmp"
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, out_dir / "manifest.txt")


def default_seed() -> int:
    return int(os.environ.get("EPIEVAL_SEED", "0"))


@click.group()
def main():
    """Simulation-backed policy-effect estimation toolkit."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="overrides root_seed from the config")
def simulate(config_path, out_path, seed):
    """Simulate a multi-location panel and write it as long-format CSV."""
    started = time.time()
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    if seed is not None:
        from dataclasses import replace
        config = replace(config, root_seed=seed)
    panel = build_panel(config)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_panel_csv(panel, out)
    write_manifest(out.parent, "simulate",
                   {"config_path": config_path, "root_seed": config.root_seed},
                   [out], started)
    click.echo(f"wrote {out} ({panel.n_locations} locations x {panel.t_total} periods)")


@main.command()
@click.argument("suite", type=click.Choice(["cases", "econ"]))
@click.option("--reps", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--horizon", type=int, default=50, show_default=True)
@click.option("--bootstrap-draws", type=int, default=999, show_default=True)
@click.option("--threads", type=int, default=-1, show_default=True, help="-1 uses all cores")
@click.option("--out", "out_dir", type=click.Path(), default="mc_out", show_default=True)
def montecarlo(suite, reps, seed, horizon, bootstrap_draws, threads, out_dir):
    """Run the replication suite for cases or economic outcomes."""
    started = time.time()
    seed = default_seed() if seed is None else seed
    report = table_suite(suite, reps=reps, seed=seed, horizon=horizon,
                         draws=bootstrap_draws, n_jobs=threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"mc_{suite}.csv"
    txt_path = out / f"mc_{suite}.txt"
    report.to_csv(csv_path)
    txt_path.write_text(report.to_text() + "\n")
    write_manifest(out, f"montecarlo {suite}",
                   {"reps": reps, "seed": seed, "horizon": horizon, "draws": bootstrap_draws},
                   [csv_path, txt_path], started)
    click.echo(report.to_text())


@main.command()
@click.option("--panel", "panel_path", required=True, type=click.Path(exists=True))
@click.option("--estimator", type=click.Choice(ALL_ESTIMATORS), default="dr-cases",
              show_default=True)
@click.option("--degree", type=int, default=3, show_default=True)
@click.option("--trim-cap", type=float, default=None)
@click.option("--bootstrap-draws", type=int, default=999, show_default=True)
@click.option("--level", type=float, default=0.95, show_default=True)
@click.option("--horizon", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--covariates", default="", help="comma-separated covariate columns")
@click.option("--out", "out_dir", type=click.Path(), default="estimate_out", show_default=True)
def estimate(panel_path, estimator, degree, trim_cap, bootstrap_draws, level, horizon,
             seed, covariates, out_dir):
    """Estimate event-study effects from a long-format panel CSV."""
    started = time.time()
    seed = default_seed() if seed is None else seed
    covariate_names = [c for c in covariates.split(",") if c]
    try:
        panel = import_panel_csv(panel_path, covariate_names=covariate_names)
    except (ConfigError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))
    options = EstimatorOptions(degree=degree, trim_cap=trim_cap,
                               covariates=tuple(covariate_names))
    groups = np.unique(panel.group[panel.treated])
    rng = np.random.default_rng([seed, 0xE57])
    try:
        if len(groups) > 1:
            grid = group_time_att(panel, estimator, horizon=horizon, options=options)
            series = event_study(grid)
        else:
            series = estimate_series(panel, estimator, horizon=horizon, options=options)
            series.periods = series.periods - int(groups[0])
            series.index_name = "e"
    except ValueError as exc:
        raise click.ClickException(f"estimation failed: {exc}")
    attach_inference(series, draws=bootstrap_draws, level=level, rng=rng)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    csv_path = out / "event_study.csv"
    series.to_frame().to_csv(csv_path, index=False)
    outputs.append(csv_path)
    dropped = series.meta.get("dropped", [])
    dropped_path = out / "dropped_locations.txt"
    dropped_path.write_text("\n".join(str(v) for v in dropped) + ("\n" if dropped else ""))
    outputs.append(dropped_path)
    if "econ_diagnostics" in series.meta:
        diag_path = out / "diagnostics.csv"
        with open(diag_path, "w") as f:
            f.write("t,alpha_t,tau_tilde_t,att_i_hat_t\n")
            for t, alpha, tau, att_i in series.meta["econ_diagnostics"]:
                f.write(f"{t},{alpha},{tau},{att_i}\n")
        outputs.append(diag_path)
    write_manifest(out, "estimate",
                   {"panel": panel_path, "estimator": estimator, "degree": degree,
                    "trim_cap": trim_cap, "level": level, "seed": seed},
                   outputs, started)
    click.echo(f"wrote {csv_path}")


PLOT_SCRIPT = """\
#!/usr/bin/env python3
# Self-contained event-study plot for an epieval estimate output.
import sys
import matplotlib.pyplot as plt
import pandas as pd

frame = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "event_study.csv")
xcol = "e" if "e" in frame.columns else "t"
fig, ax = plt.subplots(figsize=(7, 4))
ax.fill_between(frame[xcol], frame["band_lo"], frame["band_hi"], alpha=0.25)
ax.plot(frame[xcol], frame["estimate"], marker="o", ms=3)
ax.axhline(0.0, color="k", lw=0.8)
ax.set_xlabel("periods since policy")
ax.set_ylabel("estimated effect")
fig.tight_layout()
fig.savefig("event_study.png", dpi=150)
print("wrote event_study.png")
"""


@main.command("plot-script")
@click.option("--out", "out_path", type=click.Path(), default="plot_event_study.py",
              show_default=True)
def plot_script(out_path):
    """Write a standalone plotting script for event-study CSV outputs."""
    Path(out_path).write_text(PLOT_SCRIPT)
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
