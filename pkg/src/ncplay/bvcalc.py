"""BV calculus on continuous piecewise-linear paths.

A :class:`Path` is the linear interpolant of its samples on ``[0, T]``.
For such paths the total variation is the sum of segment lengths, the sup
distance between two paths is attained on the union of their grids, and
both are computed exactly (up to rounding).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from .errors import BadInterval, DegenerateVariation, DimensionMismatch, DomainMismatch, InvalidPath

DUP_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class Path:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or v.ndim != 2 or len(t) != len(v):
            raise InvalidPath(f"times {t.shape} and values {v.shape} do not align")
        if len(t) < 2:
            raise InvalidPath("a path needs at least two samples")
        if t[0] != 0.0:
            raise InvalidPath(f"paths start at t=0, got {t[0]}")
        if np.any(np.diff(t) <= 0):
            raise InvalidPath("times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise InvalidPath("path has non-finite entries")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return len(self.times)

    def __call__(self, t) -> np.ndarray:
        """Evaluate at the scalar or array ``t``; returns shape (d,) or (m, d)."""
        tt = np.asarray(t, dtype=float)
        out = np.stack(
            [np.interp(tt, self.times, self.values[:, i]) for i in range(self.dim)], axis=-1
        )
        return out

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.increments(), axis=1)


class TimeChange(Path):
    """Scalar nondecreasing path with ``phi(0) = 0`` and ``phi(T) = T``.

    The zero function is also accepted: it is the normalized arc-length of a
    constant path.
    """

    def __post_init__(self):
        super().__post_init__()
        if self.dim != 1:
            raise InvalidPath("a time change is scalar")
        phi = self.values[:, 0]
        if np.any(np.diff(phi) < 0):
            raise InvalidPath("a time change must be nondecreasing")
        if phi[0] != 0.0:
            raise InvalidPath("a time change must satisfy phi(0) = 0")
        zero = np.all(phi == 0.0)
        if not zero and abs(phi[-1] - self.T) > 1e-12 * self.T:
            raise InvalidPath("a time change must satisfy phi(T) = T")


def identity_time_change(T: float) -> TimeChange:
    return TimeChange(np.array([0.0, T]), np.array([0.0, T]))


def _same_domain(f: Path, g: Path):
    if f.dim != g.dim:
        raise DimensionMismatch(f"dimensions differ: {f.dim} vs {g.dim}")
    if abs(f.T - g.T) > 1e-12 * max(f.T, g.T):
        raise DomainMismatch(f"paths live on different intervals: T={f.T} vs T={g.T}")


def union_grid(*paths: Path) -> np.ndarray:
    grid = np.unique(np.concatenate([p.times for p in paths]))
    # merge stamps that differ only by rounding
    keep = np.concatenate([[True], np.diff(grid) > DUP_TOL * grid[-1]])
    grid = grid[keep]
    grid[-1] = max(p.T for p in paths)
    return grid


def resample(f: Path, grid: np.ndarray) -> Path:
    return Path(grid, f(grid))


def combine(f: Path, g: Path, a: float = 1.0, b: float = 1.0) -> Path:
    """``a f + b g`` on the union grid (exact for polylines)."""
    _same_domain(f, g)
    grid = union_grid(f, g)
    return Path(grid, a * f(grid) + b * g(grid))


def variation(f: Path, a: float = 0.0, b: float | None = None) -> float:
    """Total variation of ``f`` on ``[a, b]`` (sum of segment lengths)."""
    if b is None:
        b = f.T
    if not (0.0 <= a <= b <= f.T):
        raise BadInterval(f"[{a}, {b}] is not a subinterval of [0, {f.T}]")
    if a == b:
        return 0.0
    inner = f.times[(f.times > a) & (f.times < b)]
    t = np.concatenate([[a], inner, [b]])
    pts = f(t)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def cumulative_variation(f: Path) -> np.ndarray:
    """``V(f, [0, t_k])`` at every node."""
    return np.concatenate([[0.0], np.cumsum(f.segment_lengths())])


def sup_distance(f: Path, g: Path) -> float:
    _same_domain(f, g)
    grid = union_grid(f, g)
    diff = f(grid) - g(grid)
    return float(np.max(np.linalg.norm(diff, axis=1)))


def bv_distance(f: Path, g: Path) -> float:
    """Sup norm plus total variation of ``f - g``."""
    diff = combine(f, g, 1.0, -1.0)
    return float(np.max(np.linalg.norm(diff.values, axis=1))) + variation(diff)


def strict_distance(f: Path, g: Path) -> float:
    """Sup distance plus the difference of total variations."""
    return sup_distance(f, g) + abs(variation(f) - variation(g))


def arc_length_profile(f: Path) -> TimeChange:
    """Normalized arc-length ``T V(f, [0, t]) / V(f, [0, T])`` (zero if constant)."""
    cum = cumulative_variation(f)
    total = cum[-1]
    if total == 0.0:
        return TimeChange(f.times, np.zeros(len(f)))
    ell = f.T * cum / total
    ell[-1] = f.T
    return TimeChange(f.times, ell)


def reparametrize_by_arclength(f: Path) -> tuple[TimeChange, Path]:
    """Return ``(ell, ftilde)`` with ``f = ftilde o ell`` and ``ftilde`` of
    constant speed ``V(f) / T``. Plateaus of ``f`` collapse to single nodes."""
    ell = arc_length_profile(f)
    if variation(f) == 0.0:
        raise DegenerateVariation("a constant path has no arc-length reparametrization")
    sigma = ell.values[:, 0]
    keep = np.concatenate([[True], np.diff(sigma) > DUP_TOL * f.T])
    if not keep[-1]:
        # last node sits on a plateau: keep it and drop its left twin instead
        j = np.flatnonzero(keep)[-1]
        keep[j] = False
        keep[-1] = True
    return ell, Path(sigma[keep], f.values[keep])


def compose_time_change(f: Path, phi: TimeChange) -> Path:
    """``f o phi`` as an exact polyline.

    The output grid is phi's grid plus the preimages of f's interior
    breakpoints, so each output segment is mapped by phi into a single
    segment of f and the composition is linear on it.
    """
    if not isinstance(phi, TimeChange):
        phi = TimeChange(phi.times, phi.values)
    if abs(f.T - phi.T) > 1e-12 * max(f.T, phi.T):
        raise DomainMismatch("f and phi live on different intervals")
    tp = phi.times
    vp = phi.values[:, 0]
    s = f.times[1:-1]
    k = np.searchsorted(vp, s, side="right") - 1
    ok = (k >= 0) & (k < len(vp) - 1)
    k, s = k[ok], s[ok]
    ok = (vp[k] < s) & (s < vp[k + 1])
    k, s = k[ok], s[ok]
    extra_t = tp[k] + (s - vp[k]) * ((tp[k + 1] - tp[k]) / (vp[k + 1] - vp[k]))

    # phi nodes first so that a stable sort prefers them on rounding ties;
    # inner values are exact (phi node values, f breakpoints), not re-interpolated
    times = np.concatenate([tp, extra_t])
    inner = np.concatenate([vp, s])
    order = np.argsort(times, kind="stable")
    times, inner = times[order], inner[order]
    keep = np.concatenate([[True], np.diff(times) > DUP_TOL * phi.T])
    times, inner = times[keep], inner[keep]
    times[-1], inner[-1] = tp[-1], vp[-1]
    return Path(times, f(inner))


def refine(f: Path, levels: int) -> Path:
    """Insert segment midpoints ``levels`` times (same interpolant)."""
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    t, v = f.times, f.values
    for _ in range(levels):
        n = len(t)
        tt = np.empty(2 * n - 1)
        vv = np.empty((2 * n - 1, v.shape[1]))
        tt[0::2], vv[0::2] = t, v
        tt[1::2] = 0.5 * (t[:-1] + t[1:])
        vv[1::2] = 0.5 * (v[:-1] + v[1:])
        t, v = tt, vv
    return type(f)(t, v) if levels else f


def subdivide(f: Path, counts: np.ndarray) -> Path:
    """Split segment ``k`` into ``counts[k]`` equal pieces.

    New values are ``v_k + (j / m) (v_{k+1} - v_k)``, computed from values
    only, so two paths with the same value sequence subdivide identically.
    """
    counts = np.asarray(counts, dtype=int)
    if np.all(counts == 1):
        return f
    ts, vs = [], []
    for k in range(len(f) - 1):
        m = counts[k]
        frac = np.arange(m) / m
        t0, t1 = f.times[k], f.times[k + 1]
        v0, v1 = f.values[k], f.values[k + 1]
        ts.append(t0 + frac * (t1 - t0))
        vs.append(v0 + frac[:, None] * (v1 - v0))
    ts.append(f.times[-1:])
    vs.append(f.values[-1:])
    return Path(np.concatenate(ts), np.concatenate(vs))


def to_csv(f: Path, path, prefix: str = "v") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"{prefix}{i + 1}" for i in range(f.dim)])
        for t, row in zip(f.times, f.values):
            writer.writerow([format(t, ".17g")] + [format(x, ".17g") for x in row])


def from_csv(path) -> Path:
    with open(FsPath(path), newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "t":
        raise InvalidPath(f"{path}: first column must be 't'")
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InvalidPath(f"{path}: ragged rows")
    return Path(data[:, 0], data[:, 1:])


def speed_profile(f: Path) -> np.ndarray:
    return f.segment_lengths() / np.diff(f.times)
