"""Catching-up solver for the play operator over prox-regular sets.

The scheme is the implicit step ``x_{k+1} = Proj_Z(x_k + du_k)`` applied to
the stop component ``x = u - y``; the play increment is the residual
``dy_k = x_k + du_k - x_{k+1}``, a proximal normal to ``Z`` at ``x_{k+1}``.
The solver is a fold over the input increments, so it only sees the
sequence of input values, never their time stamps.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry as geo
from .bvcalc import Path, refine, subdivide, sup_distance, variation
from .errors import (
    GridBudgetExceeded,
    InitialConditionViolation,
    NotMember,
    StepTooLarge,
)
from .report import Report


@dataclass(frozen=True)
class SolverOptions:
    step_fraction: float = 0.25
    max_points: int = 2**20
    residual_targets: int = 64

    def __post_init__(self):
        if not 0 < self.step_fraction <= 1:
            raise ValueError("step_fraction must lie in (0, 1]")
        if self.max_points < 2:
            raise ValueError("max_points must be at least 2")
        if self.residual_targets < 1:
            raise ValueError("residual_targets must be positive")


@dataclass(frozen=True, eq=False)
class PlaySolution:
    """Input, play, stop and Q outputs on a common grid.

    ``x`` holds the projection outputs (so it lies in Z up to rounding),
    ``y`` accumulates the normal increments and ``w = y - x``.
    """

    times: np.ndarray
    u: np.ndarray
    y: np.ndarray
    x: np.ndarray
    set: geo.SetSpec
    z0: np.ndarray
    options: SolverOptions = field(default_factory=SolverOptions)
    diagnostics: dict = field(default_factory=dict)

    @property
    def w(self) -> np.ndarray:
        return self.y - self.x

    @property
    def du(self):
        return np.diff(self.u, axis=0)

    @property
    def dy(self):
        return np.diff(self.y, axis=0)

    @property
    def dx(self):
        return np.diff(self.x, axis=0)

    @property
    def dw(self):
        return np.diff(self.w, axis=0)

    def path(self, which: str) -> Path:
        return Path(self.times, getattr(self, which))

    @property
    def y_path(self) -> Path:
        return self.path("y")

    def __len__(self):
        return len(self.times)


def _step(s: geo.SetSpec, x_k: np.ndarray, du: np.ndarray):
    if not du.any():
        return x_k, np.zeros_like(du)
    p = x_k + du
    x_next = s._proj(p)
    return x_next, p - x_next


def catching_up_step(s: geo.SetSpec, x_k, du):
    """One implicit step; returns ``(x_next, dy)``."""
    x_k = geo.as_vec(x_k, s.dim)
    du = geo.as_vec(du, s.dim)
    if not geo.contains(s, x_k, geo.GEOM_TOL):
        raise NotMember("x_k must lie in the characteristic set")
    if math.isfinite(s.prox_radius) and geo._norm(du) >= s.prox_radius:
        raise StepTooLarge(
            f"|du| = {geo._norm(du):.6g} is not below prox radius {s.prox_radius:.6g}"
        )
    return _step(s, x_k, du)


def step_counts(s: geo.SetSpec, u: Path, opts: SolverOptions) -> np.ndarray:
    """Pieces per input segment so that every increment is at most
    ``step_fraction * prox_radius`` (one piece per segment for convex sets)."""
    n = len(u) - 1
    if math.isinf(s.prox_radius):
        return np.ones(n, dtype=int)
    cap = opts.step_fraction * s.prox_radius
    return np.maximum(1, np.ceil(u.segment_lengths() / cap)).astype(int)


def prerefined_size(s: geo.SetSpec, u: Path, opts: SolverOptions) -> int:
    return int(step_counts(s, u, opts).sum()) + 1


def solve_play(s: geo.SetSpec, u: Path, z0, opts: SolverOptions | None = None) -> PlaySolution:
    opts = opts or SolverOptions()
    z0 = geo.as_vec(z0, s.dim)
    if u.dim != s.dim:
        raise geo.DimensionMismatch(f"input has dimension {u.dim}, set has {s.dim}")
    if not geo.contains(s, z0):
        raise InitialConditionViolation(
            "initial condition violated: z0 must lie in Z so that u(0) - y(0) = z0 is admissible "
            f"(z0 = {z0.tolist()}, distance to Z = {geo.distance(s, z0):.6g})"
        )
    n_points = prerefined_size(s, u, opts)
    if n_points > opts.max_points:
        raise GridBudgetExceeded(f"{n_points} grid points needed, budget is {opts.max_points}")

    if variation(u) == 0.0:
        n = len(u)
        x = np.tile(z0, (n, 1))
        y = np.tile(u.values[0] - z0, (n, 1))
        return PlaySolution(u.times.copy(), u.values.copy(), y, x, s, z0, opts, {"degenerate": True})

    grid = subdivide(u, step_counts(s, u, opts))
    uv = grid.values
    n = len(grid)
    x = np.empty_like(uv)
    y = np.empty_like(uv)
    x[0] = z0
    y[0] = uv[0] - z0
    du = np.diff(uv, axis=0)
    x_k, y_k = x[0], y[0]
    for k in range(n - 1):
        x_k, dy = _step(s, x_k, du[k])
        y_k = y_k + dy
        x[k + 1] = x_k
        y[k + 1] = y_k
    return PlaySolution(grid.times.copy(), uv.copy(), y, x, s, z0, opts, {"points": n})


def solve_adaptive(s: geo.SetSpec, u: Path, z0, tol: float, opts: SolverOptions | None = None) -> PlaySolution:
    """Refine the input grid until consecutive play outputs agree within ``tol``.

    Returns the finer solution of the first pair that agrees. Its
    diagnostics record ``level`` (refinements of ``u`` used), ``gap`` and
    ``converged_level`` (the coarser level that was already within ``tol``).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    opts = opts or SolverOptions()
    prev = solve_play(s, u, z0, opts)
    gap = None
    level = 0
    while True:
        level += 1
        if 2 ** level * (len(u) - 1) + 1 > opts.max_points:
            raise GridBudgetExceeded(f"refinement level {level} exceeds the grid budget; last gap {gap}", gap)
        try:
            sol = solve_play(s, refine(u, level), z0, opts)
        except GridBudgetExceeded as exc:
            raise GridBudgetExceeded(f"{exc}; last gap {gap}", gap) from None
        gap = sup_distance(sol.y_path, prev.y_path)
        if gap <= tol:
            diag = dict(sol.diagnostics, level=level, converged_level=level - 1, gap=gap)
            return replace(sol, diagnostics=diag)
        prev = sol


def corrupt(sol: PlaySolution, node: int, delta) -> PlaySolution:
    """Copy of ``sol`` with ``y[node] += delta`` and ``x`` kept equal to ``u - y``."""
    y = sol.y.copy()
    x = sol.x.copy()
    y[node] += delta
    x[node] -= delta
    return replace(sol, y=y, x=x, diagnostics=dict(sol.diagnostics, corrupted_node=node))


def _ball_samples(rng, centers, radii, m, dim):
    g = rng.standard_normal((len(centers), m, dim))
    g /= np.linalg.norm(g, axis=2, keepdims=True)
    r = radii[:, None] * rng.uniform(size=(len(centers), m)) ** (1.0 / dim)
    return centers[:, None, :] + r[:, :, None] * g


def vi_residual(sol: PlaySolution, sampler_seed: int, chunk: int = 2048) -> float:
    """Largest violation of ``<z - x_{k+1}, dy_k> <= |dy_k| / (2 r) |z - x_{k+1}|^2``
    over members ``z`` sampled near ``x_k`` plus extreme candidates."""
    s = sol.set
    rng = np.random.default_rng(sampler_seed)
    dy = sol.dy
    norms = np.linalg.norm(dy, axis=1)
    active = np.flatnonzero(norms > 0)
    if len(active) == 0:
        return 0.0
    coef = 0.0 if math.isinf(s.prox_radius) else 1.0 / (2.0 * s.prox_radius)
    m = sol.options.residual_targets
    worst = 0.0
    for start in range(0, len(active), chunk):
        ks = active[start:start + chunk]
        radii = 2.0 * norms[ks] + s.extent
        cand = _ball_samples(rng, sol.x[ks], radii, 4 * m, s.dim)
        member = (s._dist(cand.reshape(-1, s.dim)) <= 0.0).reshape(cand.shape[:2])
        member &= np.cumsum(member, axis=1) <= m
        rel = cand - sol.x[ks + 1][:, None, :]
        lhs = np.einsum("kmd,kd->km", rel, dy[ks])
        rhs = coef * norms[ks][:, None] * np.einsum("kmd,kmd->km", rel, rel)
        viol = np.where(member, lhs - rhs, -np.inf)
        worst = max(worst, float(viol.max()))

    n = len(sol.times)
    for k in active:
        xn = sol.x[k + 1]
        extra = [sol.x[k]]
        if k + 2 < n:
            extra.append(sol.x[k + 2])
        try:
            extra += s._witnesses(xn, [dy[k] / norms[k]])
        except NotMember:
            pass
        z = np.array(extra)
        z = z[s._dist(z) <= geo.ALG_TOL]
        if len(z) == 0:
            continue
        rel = z - xn
        viol = rel @ dy[k] - coef * norms[k] * np.einsum("md,md->m", rel, rel)
        worst = max(worst, float(viol.max()))
    return worst


def inclusion_residual(sol: PlaySolution, probe_fraction: float = 0.5) -> float:
    """Largest displacement when re-projecting ``x_{k+1}`` pushed along ``dy_k``.

    Zero certifies ``dy_k`` as a proximal normal at ``x_{k+1}``. The probe
    length is ``probe_fraction * prox_radius``, or ``10 * probe_fraction * |dy_k|``
    for convex sets.
    """
    if not 0 < probe_fraction < 1:
        raise ValueError("probe_fraction must lie in (0, 1)")
    s = sol.set
    dy = sol.dy
    norms = np.linalg.norm(dy, axis=1)
    worst = 0.0
    for k in np.flatnonzero(norms > 0):
        rho = probe_fraction * s.prox_radius
        if math.isinf(rho):
            rho = 10.0 * probe_fraction * norms[k]
        xn = sol.x[k + 1]
        q = geo.project(s, xn + (rho / norms[k]) * dy[k])
        worst = max(worst, geo._norm(q - xn))
    return worst


def _total_length(values):
    return float(np.sum(np.linalg.norm(np.diff(values, axis=0), axis=1)))


def normality_metrics(sol: PlaySolution) -> dict[str, float]:
    dy, dx, du, dw = sol.dy, sol.dx, sol.du, sol.dw
    inner = np.einsum("kd,kd->k", dy, dx)
    usq = float(np.einsum("kd,kd->", du, du))
    speed = np.abs(np.linalg.norm(dw, axis=1) - np.linalg.norm(du, axis=1))
    return {
        "normality_ratio": float(np.abs(inner).sum() / usq) if usq > 0 else 0.0,
        "inner_sum": float(np.abs(inner).sum()),
        "min_inner": float(inner.min()) if len(inner) else 0.0,
        "speed_defect": float(speed.max()) if len(speed) else 0.0,
        "variation_defect": abs(_total_length(sol.w) - _total_length(sol.u)),
    }


def normality_report(sol: PlaySolution) -> Report:
    """Discrete normality quantities; these are O(h), recorded for refinement studies."""
    return Report(
        name="normality",
        rule="info",
        rows=[("solution", normality_metrics(sol))],
        tolerance_used=0.0,
    )


def to_csv(sol: PlaySolution, path) -> None:
    d = sol.u.shape[1]
    header = ["t"] + [f"{name}{i + 1}" for name in "uyxw" for i in range(d)]
    w = sol.w
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k, t in enumerate(sol.times):
            row = [t, *sol.u[k], *sol.y[k], *sol.x[k], *w[k]]
            writer.writerow([format(float(v), ".17g") for v in row])
