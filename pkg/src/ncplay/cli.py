"""Command-line front end.

Exit codes: 0 all experiments passed, 1 operational error, 2 an experiment failed.
"""
from __future__ import annotations

import csv
import sys
from pathlib import Path as FsPath

import click
import numpy as np

from . import geometry as geo
from . import playcore, presets, propcheck
from .bvcalc import Path, identity_time_change
from .errors import PlayError, ProjectionError
from .report import Report
from .scenario import Experiment, Scenario, describe, load_scenario

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _phi(kind: str, u: Path, seed: int | None):
    if kind == "identity":
        return identity_time_change(u.T)
    if kind == "value_preserving":
        return propcheck.value_preserving_time_change(u, seed)
    if kind == "quadratic":
        return propcheck.quadratic_time_change(u.T, len(u))
    raise PlayError(f"unknown time change '{kind}'")


def _perturbation(sc: Scenario, name: str, args: dict) -> Path:
    if name not in presets.PRESETS:
        raise PlayError(f"unknown perturbation preset '{name}'")
    args = dict(args)
    args.setdefault("T", sc.input.T)
    if name == "zigzag":
        args.setdefault("direction", [1.0] * sc.set.dim)
    return presets.PRESETS[name](**args)


def run_experiment(sc: Scenario, exp: Experiment, sol: playcore.PlaySolution) -> Report:
    p = exp.params
    s, u, z0, opts = sc.set, sc.input, sc.z0, sc.solver
    if exp.kind == "rate_independence":
        return propcheck.check_rate_independence(
            s, u, z0, _phi(p["phi"], u, exp.seed), opts, levels=int(p["levels"]), tol=float(p["tol"])
        )
    if exp.kind == "normality":
        return propcheck.check_normality(s, u, z0, int(p["levels"]), opts)
    if exp.kind == "continuity":
        pert = _perturbation(sc, p["perturbation"], p["perturbation_args"])
        return propcheck.continuity_experiment(
            s, u, z0, p["mode"], int(p["n_terms"]), pert, opts=opts,
            adaptive_tol=float(p["adaptive_tol"]), factor=float(p["factor"]),
        )
    if exp.kind == "convergence_order":
        return propcheck.convergence_order(
            s, u, z0, int(p["levels"]), opts, expected_order=p["expected_order"], band=float(p["band"])
        )
    if exp.kind == "residuals":
        target = sol
        notes = []
        if p["corrupt_node"] is not None:
            delta = np.full(s.dim, float(p["corrupt_delta"]))
            target = playcore.corrupt(sol, int(p["corrupt_node"]), delta)
            notes.append(f"y corrupted by {p['corrupt_delta']} at node {p['corrupt_node']}")
        vi = playcore.vi_residual(target, exp.seed)
        try:
            inc = playcore.inclusion_residual(target, float(p["probe_fraction"]))
        except ProjectionError as exc:
            inc = float("inf")
            notes.append(f"inclusion probe failed: {exc}")
        return Report(
            name="residuals",
            rule="max_leq",
            rows=[("vi", {"residual": vi}), ("inclusion", {"residual": inc})],
            tolerance_used=float(p["tol"]),
            params={"metric": "residual"},
            notes=notes,
        )
    if exp.kind == "prox_regularity":
        r = s.prox_radius if p["r"] is None else float(p["r"])
        return geo.verify_prox_regularity(s, r, int(p["n_boundary"]), int(p["n_targets"]), exp.seed)
    raise PlayError(f"unknown experiment kind '{exp.kind}'")


def execute(sc: Scenario, quiet: bool = False) -> int:
    out = FsPath(sc.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    sol = playcore.solve_play(sc.set, sc.input, sc.z0, sc.solver)
    playcore.to_csv(sol, out / f"{sc.name}_trajectory.csv")

    reports = []
    for exp in sc.experiments:
        try:
            rep = run_experiment(sc, exp, sol)
        except PlayError as exc:
            raise PlayError(f"experiment '{exp.label}': {exc}") from exc
        reports.append((exp.label, rep))
        if not quiet:
            click.echo(f"{exp.label}: {rep.name} {'PASS' if rep.passed else 'FAIL'}")

    with open(out / f"{sc.name}_report.txt", "w") as fh:
        fh.write(f"scenario = {sc.name}\n")
        fh.write(f"trajectory_points = {len(sol)}\n")
        for label, rep in reports:
            fh.write(f"\n[{label}]\n")
            fh.write(rep.to_text())
    with open(out / f"{sc.name}_report.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "metric", "value"])
        for label, rep in reports:
            writer.writerows(rep.csv_rows(prefix=f"{label}/"))
            writer.writerow([f"{label}/verdict", "pass", "1" if rep.passed else "0"])

    failed = [label for label, rep in reports if not rep.passed]
    if not quiet:
        click.echo(f"trajectory: {out / (sc.name + '_trajectory.csv')} ({len(sol)} points)")
        click.echo("all experiments passed" if not failed else f"failed: {', '.join(failed)}")
    return EXIT_FAIL if failed else EXIT_OK


@click.group()
def cli():
    """Non-convex play operator: solve scenarios and run property experiments."""


@cli.command()
@click.argument("scenario_file", type=click.Path(dir_okay=False))
@click.option("--output-dir", default=None, help="Override the scenario's output directory.")
@click.option("--levels", type=int, default=None, help="Override refinement levels of all experiments.")
@click.option("--seed", type=int, default=None, help="Override all experiment seeds.")
@click.option("--quiet", is_flag=True)
def run(scenario_file, output_dir, levels, seed, quiet):
    """Solve a scenario, write its trajectory and experiment reports."""
    try:
        sc = load_scenario(scenario_file, output_dir=output_dir, levels=levels, seed=seed)
        return execute(sc, quiet)
    except PlayError as exc:
        click.echo(f"error: scenario {scenario_file}: {exc}", err=True)
        return EXIT_ERROR


@cli.command()
@click.argument("scenario_file", type=click.Path(dir_okay=False))
@click.option("--quiet", is_flag=True)
def validate(scenario_file, quiet):
    """Parse and check a scenario without solving it."""
    try:
        sc = load_scenario(scenario_file)
        lines = describe(sc)
    except PlayError as exc:
        click.echo(f"error: scenario {scenario_file}: {exc}", err=True)
        return EXIT_ERROR
    if not quiet:
        for line in lines:
            click.echo(line)
    return EXIT_OK


@cli.command()
def catalog():
    """List the characteristic sets and their prox-regularity radii."""
    for name, fields, formula in geo.CATALOG:
        click.echo(f"{name}: {formula}  [fields: {fields}]")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="ncplay", standalone_mode=False)
    except click.exceptions.Abort:
        return EXIT_ERROR
    except click.ClickException as exc:
        exc.show()
        return EXIT_ERROR
    return rv if isinstance(rv, int) else EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
