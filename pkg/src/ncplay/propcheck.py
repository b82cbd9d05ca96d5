"""Refinement experiments for the structural properties of the play operator.

The continuous statements (rate independence, normality, continuity in the
BV norm and strict metric) are qualitative. Each experiment measures the
discrete defect across grid refinements and records it in a
:class:`~ncplay.report.Report` whose verdict is recomputed from its rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import presets
from .bvcalc import (
    Path,
    TimeChange,
    bv_distance,
    compose_time_change,
    refine,
    resample,
    strict_distance,
    sup_distance,
    union_grid,
)
from .errors import InadmissiblePerturbation, ProjectionError
from .playcore import SolverOptions, normality_metrics, solve_adaptive, solve_play
from .report import Report


def is_value_preserving(u: Path, phi: TimeChange) -> bool:
    """True when every node value of ``phi`` is a grid time of ``u``; then
    ``u o phi`` visits the node values of ``u`` in order, with repeats."""
    return bool(np.all(np.isin(phi.values[:, 0], u.times)))


def value_preserving_time_change(u: Path, seed: int = 0, plateaus: int = 1) -> TimeChange:
    """A piecewise-linear time change mapping a random new grid onto u's grid,
    with ``plateaus`` repeated node values (intervals where phi is constant)."""
    rng = np.random.default_rng(seed)
    targets = list(u.times)
    for _ in range(plateaus):
        j = int(rng.integers(1, len(targets) - 1)) if len(targets) > 2 else 0
        targets.insert(j, targets[j])
    gaps = rng.uniform(0.2, 1.0, len(targets) - 1)
    times = np.concatenate([[0.0], np.cumsum(gaps)])
    times *= u.T / times[-1]
    times[-1] = u.T
    return TimeChange(times, np.array(targets))


def quadratic_time_change(T: float, n: int) -> TimeChange:
    """``phi(t) = t^2 / T`` sampled at ``n`` uniform nodes."""
    t = np.linspace(0.0, T, n)
    t[-1] = T
    phi = t**2 / T
    phi[-1] = T
    return TimeChange(t, phi)


def check_rate_independence(
    s: geo.SetSpec,
    u: Path,
    z0,
    phi: TimeChange,
    opts: SolverOptions | None = None,
    levels: int = 3,
    tol: float = 1e-6,
) -> Report:
    """Compare ``Pl(u o phi)`` with ``Pl(u) o phi`` on the base grid and
    ``levels`` refinements of both ``u`` and ``phi``."""
    opts = opts or SolverOptions()
    preserving = is_value_preserving(u, phi)
    rows = []
    for j in range(levels + 1):
        uj, pj = refine(u, j), refine(phi, j)
        lhs = solve_play(s, compose_time_change(uj, pj), z0, opts).y_path
        rhs = compose_time_change(solve_play(s, uj, z0, opts).y_path, pj)
        rows.append((f"level{j}", {"points": float(len(uj)), "error": sup_distance(lhs, rhs)}))
    if preserving:
        return Report(
            name="rate_independence[value-preserving]",
            rule="final_leq",
            rows=rows,
            tolerance_used=tol,
            params={"metric": "error"},
        )
    return Report(
        name="rate_independence[refinement]",
        rule="shrinking",
        rows=rows,
        tolerance_used=tol,
        params={"metric": "error"},
    )


def check_normality(
    s: geo.SetSpec,
    u: Path,
    z0,
    levels: int = 3,
    opts: SolverOptions | None = None,
    lo: float = 1.4,
    hi: float = 2.6,
) -> Report:
    """Discrete normality defects at ``levels + 1`` grids; they should halve."""
    if levels < 2:
        raise ValueError("levels must be at least 2")
    opts = opts or SolverOptions()
    rows = []
    for j in range(levels + 1):
        sol = solve_play(s, refine(u, j), z0, opts)
        m = normality_metrics(sol)
        rows.append(
            (
                f"level{j}",
                {
                    "points": float(len(sol)),
                    "normality_ratio": m["normality_ratio"],
                    "variation_defect": m["variation_defect"],
                    "speed_defect": m["speed_defect"],
                    "min_inner": m["min_inner"],
                },
            )
        )
    return Report(
        name="normality",
        rule="factor_range",
        rows=rows,
        tolerance_used=1e-14,
        params={"metrics": "normality_ratio,variation_defect", "lo": lo, "hi": hi},
    )


METRICS = {"bv": bv_distance, "strict": strict_distance}


def continuity_experiment(
    s: geo.SetSpec,
    u: Path,
    z0,
    mode: str,
    n_terms: int,
    perturbation: Path,
    z0_seq=None,
    opts: SolverOptions | None = None,
    adaptive_tol: float = 1e-3,
    factor: float = 10.0,
) -> Report:
    """Output distances ``d(Pl(u_n, z0_n), Pl(u, z0))`` for ``u_n = u + perturbation / n``.

    All inputs share one grid: the union grid of ``u`` and the
    perturbation, refined to the level at which ``solve_adaptive`` meets
    ``adaptive_tol``. The achieved Cauchy gap enters the final-value floor.
    """
    if mode not in METRICS:
        raise ValueError(f"mode must be one of {sorted(METRICS)}")
    metric = METRICS[mode]
    opts = opts or SolverOptions()
    z0 = geo.as_vec(z0, s.dim)
    if z0_seq is None:
        z0_seq = [z0] * n_terms
    if len(z0_seq) < n_terms:
        raise ValueError("z0_seq is shorter than n_terms")
    grid = union_grid(u, perturbation)
    base = resample(u, grid)
    adaptive = solve_adaptive(s, base, z0, adaptive_tol, opts)
    level = adaptive.diagnostics["level"]
    fine = refine(base, level)
    pert = perturbation(fine.times)
    ref = solve_play(s, fine, z0, opts).y_path

    rows = []
    for n in range(1, n_terms + 1):
        zn = geo.as_vec(z0_seq[n - 1], s.dim)
        if not geo.contains(s, zn):
            raise InadmissiblePerturbation(f"z0 for n={n} is not in Z")
        un = Path(fine.times, fine.values + pert / n)
        try:
            yn = solve_play(s, un, zn, opts).y_path
        except ProjectionError as exc:
            raise InadmissiblePerturbation(f"n={n}: {exc}") from exc
        dz = float(np.linalg.norm(zn - z0))
        rows.append(
            (
                f"n{n}",
                {
                    "n": float(n),
                    "input_distance": metric(un, fine) + dz,
                    "output_distance": metric(yn, ref),
                },
            )
        )
    return Report(
        name=f"continuity[{mode}]",
        rule="continuity",
        rows=rows,
        tolerance_used=factor,
        params={"noise": 0.05, "grid_gap": float(adaptive.diagnostics["gap"]), "floor": 1e-12, "level": level},
    )


def convergence_order(
    s: geo.SetSpec,
    u: Path,
    z0,
    levels: int = 3,
    opts: SolverOptions | None = None,
    oracle_extra: int = 4,
    expected_order: float | None = None,
    band: float = 0.3,
) -> Report:
    """Errors against an oracle solved ``oracle_extra`` levels past the
    finest grid, and Richardson orders ``log2(e_j / e_{j+1})``.

    A far-finer oracle keeps the estimate from drifting upward at the last
    levels (comparing against the finest studied level biases it).
    """
    if levels < 3:
        raise ValueError("levels must be at least 3")
    opts = opts or SolverOptions()
    oracle = solve_play(s, refine(u, levels + oracle_extra), z0, opts).y_path
    errors = []
    points = []
    for j in range(levels + 1):
        sol = solve_play(s, refine(u, j), z0, opts)
        errors.append(sup_distance(sol.y_path, oracle))
        points.append(len(sol))
    rows = []
    for j, e in enumerate(errors):
        if j + 1 < len(errors) and e > 0 and errors[j + 1] > 0:
            p = math.log2(e / errors[j + 1])
        else:
            p = math.nan
        rows.append((f"level{j}", {"points": float(points[j]), "error": e, "order": p}))
    if expected_order is None:
        return Report(name="convergence_order", rule="info", rows=rows, tolerance_used=band)
    return Report(
        name="convergence_order",
        rule="order_band",
        rows=rows,
        tolerance_used=band,
        params={"expected_order": float(expected_order)},
    )


@dataclass(frozen=True)
class Case:
    name: str
    set: geo.SetSpec
    u: Path
    z0: np.ndarray


def standard_suite(n: int = 129) -> list[Case]:
    """One representative input per catalog set (2D)."""
    return [
        Case(
            "box",
            geo.Box([-1.0, -1.0], [1.0, 1.0]),
            presets.lissajous(T=2 * np.pi, n=n, ax=2.0, ay=1.5),
            np.array([0.0, 0.0]),
        ),
        Case(
            "ball",
            geo.Ball([0.0, 0.0], 1.0),
            presets.sliding(T=np.pi, n=n, exterior=False),
            np.array([1.0, 0.0]),
        ),
        Case(
            "halfspace",
            geo.Halfspace(np.array([1.0, 1.0]) / np.sqrt(2.0), 0.5),
            presets.circle_arc(T=2 * np.pi, n=n, radius=2.0, angle0=0.0, angle1=2 * np.pi),
            np.array([0.0, 0.0]),
        ),
        Case(
            "complement",
            geo.ComplementOfBall([0.0, 0.0], 1.0),
            presets.sliding(T=np.pi / 2, n=n, exterior=True),
            np.array([1.0, 0.0]),
        ),
        Case(
            "union",
            geo.Union((geo.Box([-3.0, -1.0], [-1.0, 1.0]), geo.Ball([2.0, 0.0], 1.0)), 2.0),
            presets.circle_arc(T=2 * np.pi, n=n, center=(2.0, 0.0), radius=1.5, angle0=0.0, angle1=2 * np.pi),
            np.array([2.0, 0.0]),
        ),
    ]
