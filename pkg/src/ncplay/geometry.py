"""Prox-regular characteristic sets with exact projections.

Every set is an immutable dataclass. ``prox_radius`` is derived from the
parameters: ``inf`` for the convex variants, the radius for the exterior of
a ball, and half the declared gap for a union of separated convex sets
(two members both realizing the distance from a point closer than gap/2
would be closer than gap to each other).

Tolerances: ``GEOM_TOL`` (1e-9) decides boundary membership, ``ALG_TOL``
(1e-12) is used for membership of projection outputs and tie detection.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AmbiguousProjection,
    DimensionMismatch,
    InvalidSet,
    NotMember,
    OutsideProxNeighborhood,
    SamplerExhausted,
)
from .report import Report

GEOM_TOL = 1e-9
ALG_TOL = 1e-12


def as_vec(p, dim: int | None = None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(p, dtype=float))
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.shape[0]}")
    return v


def _norm(v: np.ndarray) -> float:
    return math.sqrt(float(v @ v))


def _unit_vectors(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    g = rng.standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class SetSpec:
    """Common interface; subclasses implement the underscore methods."""

    kind: str = "SetSpec"
    convex: bool = True

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def prox_radius(self) -> float:
        return math.inf

    @property
    def extent(self) -> float:
        """Characteristic length used to size sampling windows."""
        return 1.0

    def _dist(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _proj(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _normals(self, x: np.ndarray, tol: float) -> list[np.ndarray]:
        raise NotImplementedError

    def _sample_boundary(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _witnesses(self, x: np.ndarray, normals: list[np.ndarray]) -> list[np.ndarray]:
        return []

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ball(SetSpec):
    center: np.ndarray
    radius: float
    kind = "Ball"

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center))
        if not self.radius > 0:
            raise InvalidSet(f"Ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def extent(self):
        return 2.0 * self.radius

    def _dist(self, pts):
        return np.maximum(np.linalg.norm(pts - self.center, axis=-1) - self.radius, 0.0)

    def _proj(self, p):
        v = p - self.center
        rho = _norm(v)
        if rho <= self.radius:
            return p
        return self.center + (self.radius / rho) * v

    def _normals(self, x, tol):
        v = x - self.center
        rho = _norm(v)
        if rho < self.radius - tol:
            return []
        return [v / rho]

    def _sample_boundary(self, rng):
        return self.center + self.radius * _unit_vectors(rng, 1, self.dim)[0]

    def _witnesses(self, x, normals):
        return [2.0 * self.center - x]

    def to_config(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Box(SetSpec):
    lo: np.ndarray
    hi: np.ndarray
    kind = "Box"

    def __post_init__(self):
        lo, hi = as_vec(self.lo), as_vec(self.hi)
        if lo.shape != hi.shape:
            raise DimensionMismatch("Box lo and hi differ in dimension")
        if np.any(lo > hi):
            raise InvalidSet("Box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    @property
    def extent(self):
        return max(float(np.linalg.norm(self.hi - self.lo)), 1e-3)

    def _dist(self, pts):
        return np.linalg.norm(pts - np.clip(pts, self.lo, self.hi), axis=-1)

    def _proj(self, p):
        return np.clip(p, self.lo, self.hi)

    def _normals(self, x, tol):
        out = []
        for i in range(self.dim):
            if x[i] <= self.lo[i] + tol:
                e = np.zeros(self.dim)
                e[i] = -1.0
                out.append(e)
            if x[i] >= self.hi[i] - tol:
                e = np.zeros(self.dim)
                e[i] = 1.0
                out.append(e)
        return out

    def _sample_boundary(self, rng):
        x = rng.uniform(self.lo, self.hi)
        if rng.uniform() < 0.25:
            return np.where(rng.uniform(size=self.dim) < 0.5, self.lo, self.hi)
        i = rng.integers(self.dim)
        x[i] = self.lo[i] if rng.uniform() < 0.5 else self.hi[i]
        return x

    def _witnesses(self, x, normals):
        if self.dim > 4:
            return []
        return [np.array(c) for c in itertools.product(*zip(self.lo, self.hi))]

    def to_config(self):
        return {"kind": self.kind, "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class Halfspace(SetSpec):
    """``{p : <normal, p> <= offset}``."""

    normal: np.ndarray
    offset: float
    kind = "Halfspace"

    def __post_init__(self):
        n = as_vec(self.normal)
        if abs(_norm(n) - 1.0) > ALG_TOL:
            raise InvalidSet("Halfspace normal must have unit norm")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.shape[0]

    def _dist(self, pts):
        return np.maximum(pts @ self.normal - self.offset, 0.0)

    def _proj(self, p):
        excess = float(p @ self.normal) - self.offset
        if excess <= 0:
            return p
        return p - excess * self.normal

    def _normals(self, x, tol):
        if float(x @ self.normal) < self.offset - tol:
            return []
        return [self.normal.copy()]

    def _sample_boundary(self, rng):
        q = rng.uniform(-1.0, 1.0, self.dim)
        return q - (float(q @ self.normal) - self.offset) * self.normal

    def to_config(self):
        return {"kind": self.kind, "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False)
class ComplementOfBall(SetSpec):
    """Closed exterior ``{p : |p - center| >= radius}``."""

    center: np.ndarray
    radius: float
    kind = "ComplementOfBall"
    convex = False

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center))
        if not self.radius > 0:
            raise InvalidSet(f"ComplementOfBall radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def prox_radius(self):
        return self.radius

    @property
    def extent(self):
        return 4.0 * self.radius

    def _dist(self, pts):
        return np.maximum(self.radius - np.linalg.norm(pts - self.center, axis=-1), 0.0)

    def _proj(self, p):
        v = p - self.center
        rho = _norm(v)
        if rho >= self.radius:
            return p
        if rho <= ALG_TOL * self.radius:
            raise AmbiguousProjection(
                "point is the center of the excluded ball; every boundary point is nearest"
            )
        return self.center + (self.radius / rho) * v

    def _normals(self, x, tol):
        v = x - self.center
        rho = _norm(v)
        if rho > self.radius + tol:
            return []
        return [-v / rho]

    def _sample_boundary(self, rng):
        return self.center + self.radius * _unit_vectors(rng, 1, self.dim)[0]

    def _witnesses(self, x, normals):
        return [2.0 * self.center - x]

    def to_config(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


CONVEX_KINDS = (Ball, Box, Halfspace)


def _member_distance(a: SetSpec, b: SetSpec, starts: Sequence[np.ndarray], iters: int = 400):
    """Upper bound on dist(a, b) by alternating projections from several starts.

    For closed convex sets the pair distance is nonincreasing along the
    iteration and converges to dist(a, b) when it is attained.
    """
    best = math.inf
    best_pair = None
    for s in starts:
        pa = a._proj(s)
        pb = b._proj(pa)
        prev = math.inf
        for _ in range(iters):
            pa = a._proj(pb)
            pb = b._proj(pa)
            gap = _norm(pa - pb)
            if prev - gap <= 1e-15 * max(1.0, gap):
                break
            prev = gap
        gap = _norm(pa - pb)
        if gap < best:
            best, best_pair = gap, (pa, pb)
    return best, best_pair


@dataclass(frozen=True, eq=False)
class Union(SetSpec):
    """Union of pairwise separated convex sets; ``gap`` is the declared
    lower bound on the distance between any two members."""

    members: tuple
    gap: float
    kind = "Union"
    convex = False
    seed: int = field(default=0, compare=False)

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) < 2:
            raise InvalidSet("Union needs at least two members")
        for m in members:
            if not isinstance(m, CONVEX_KINDS):
                raise InvalidSet(f"Union members must be convex, got {type(m).__name__}")
        if len({m.dim for m in members}) != 1:
            raise DimensionMismatch("Union members differ in dimension")
        if not self.gap > 0:
            raise InvalidSet("Union gap must be positive")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "gap", float(self.gap))
        self.check_gap()

    def check_gap(self):
        rng = np.random.default_rng(self.seed)
        for i, j in itertools.combinations(range(len(self.members)), 2):
            a, b = self.members[i], self.members[j]
            starts = [rng.standard_normal(self.dim) * 3.0 for _ in range(4)]
            for m in (a, b):
                starts.append(m._sample_boundary(rng))
            d, _ = _member_distance(a, b, starts)
            if d < self.gap - GEOM_TOL:
                raise InvalidSet(
                    f"Union members {i} and {j} are {d:.6g} apart, closer than declared gap {self.gap:.6g}"
                )

    @property
    def dim(self):
        return self.members[0].dim

    @property
    def prox_radius(self):
        return self.gap / 2.0

    @property
    def extent(self):
        return max(m.extent for m in self.members) + self.gap

    def _dist(self, pts):
        return np.min(np.stack([m._dist(pts) for m in self.members]), axis=0)

    def _ranked(self, p):
        d = np.array([float(m._dist(p)) for m in self.members])
        order = np.argsort(d, kind="stable")
        return d, order

    def _proj(self, p):
        d, order = self._ranked(p)
        best, second = d[order[0]], d[order[1]]
        if best == 0.0:
            return p
        if second - best <= ALG_TOL * max(1.0, best):
            raise AmbiguousProjection(
                f"point is equidistant ({best:.6g}) to members {order[0]} and {order[1]}"
            )
        if best >= self.prox_radius:
            raise OutsideProxNeighborhood(
                f"distance {best:.6g} is not below prox radius {self.prox_radius:.6g}"
            )
        return self.members[order[0]]._proj(p)

    def member_of(self, x, tol=GEOM_TOL) -> int:
        d, order = self._ranked(x)
        if d[order[0]] > tol:
            raise NotMember("point is not in any member")
        return int(order[0])

    def _normals(self, x, tol):
        return self.members[self.member_of(x, tol)]._normals(x, tol)

    def _sample_boundary(self, rng):
        return self.members[rng.integers(len(self.members))]._sample_boundary(rng)

    def _witnesses(self, x, normals):
        k = self.member_of(x)
        out = list(self.members[k]._witnesses(x, normals))
        for j, m in enumerate(self.members):
            if j == k:
                continue
            out.append(m._proj(x))
            for n in normals:
                out.append(m._proj(x + self.prox_radius * n))
        return out

    def to_config(self):
        return {"kind": self.kind, "members": [m.to_config() for m in self.members], "gap": self.gap}


def _check_dim(s: SetSpec, p) -> np.ndarray:
    return as_vec(p, s.dim)


def contains(s: SetSpec, p, tol: float = ALG_TOL) -> bool:
    """Membership of the closed set, up to ``tol`` (rounding of projections)."""
    return bool(s._dist(_check_dim(s, p)) <= tol)


def distance(s: SetSpec, p) -> float:
    return float(s._dist(_check_dim(s, p)))


def project(s: SetSpec, p) -> np.ndarray:
    """Unique nearest point; raises for ties and points too far from a
    non-convex set."""
    return s._proj(_check_dim(s, p))


def proximal_normal(s: SetSpec, x, probe: float, tol: float = GEOM_TOL) -> list[np.ndarray]:
    """Extreme unit proximal normals at ``x``; empty for interior points."""
    x = _check_dim(s, x)
    if not 0 < probe < s.prox_radius:
        raise ValueError(f"probe must lie in (0, {s.prox_radius}), got {probe}")
    if not contains(s, x, tol):
        raise NotMember("point is not in the set")
    return s._normals(x, tol)


def _conic_combination(rng, normals):
    w = rng.uniform(0.05, 1.0, len(normals))
    n = np.sum([wi * ni for wi, ni in zip(w, normals)], axis=0)
    return n / _norm(n)


def sample_members(s: SetSpec, rng, center, half_width, n, max_batches=50) -> np.ndarray:
    """Rejection sampling of up to ``n`` members in a cube around ``center``."""
    found = []
    total = 0
    for _ in range(max_batches):
        cand = center + rng.uniform(-half_width, half_width, (4 * n, s.dim))
        keep = cand[s._dist(cand) <= 0.0]
        found.append(keep)
        total += len(keep)
        if total >= n:
            break
    if total == 0:
        raise SamplerExhausted("no members found in the sampling window")
    return np.concatenate(found)[:n]


def verify_prox_regularity(
    s: SetSpec, r: float, n_boundary: int, n_targets: int, seed: int, tol: float = GEOM_TOL
) -> Report:
    """Sampled check of ``<n, z - x> <= |z - x|^2 / (2 r)`` for unit proximal
    normals ``n`` at boundary points ``x`` and members ``z``.

    Violations can only occur within ``2 r`` of ``x``, so targets are drawn
    from a cube of that half-width (capped by the set's extent) and
    supplemented by analytically extreme candidates such as antipodes.
    """
    if n_boundary < 1 or n_targets < 1:
        raise ValueError("sample counts must be positive")
    if not r > 0:
        raise ValueError("r must be positive")
    rng = np.random.default_rng(seed)
    half_width = min(2.0 * r, s.extent) if math.isfinite(r) else s.extent
    inv2r = 0.0 if math.isinf(r) else 1.0 / (2.0 * r)

    worst = -math.inf
    witness = None
    pairs = 0
    for _ in range(n_boundary):
        x = s._sample_boundary(rng)
        normals = s._normals(x, GEOM_TOL)
        if not normals:
            continue
        tests = list(normals)
        if len(normals) > 1:
            tests.append(_conic_combination(rng, normals))
        z = sample_members(s, rng, x, half_width, n_targets)
        extra = [w for w in s._witnesses(x, normals) if s._dist(w) <= ALG_TOL]
        if extra:
            z = np.vstack([z, np.array(extra)])
        dz = z - x
        sq = np.einsum("ij,ij->i", dz, dz)
        for n in tests:
            viol = dz @ n - inv2r * sq
            k = int(np.argmax(viol))
            pairs += len(viol)
            if viol[k] > worst:
                worst = float(viol[k])
                witness = (x.copy(), n.copy(), z[k].copy())

    if witness is None:
        raise SamplerExhausted("no boundary point with a proximal normal was sampled")
    max_violation = max(worst, 0.0)
    wrow = {}
    for name, vec in zip(("x", "n", "z"), witness):
        for i, c in enumerate(vec):
            wrow[f"{name}{i + 1}"] = float(c)
    return Report(
        name=f"prox_regularity[{s.kind}, r={r:g}]",
        rule="max_leq",
        rows=[
            ("summary", {"max_violation": max_violation, "pairs": float(pairs), "r": float(r)}),
            ("witness", wrow),
        ],
        tolerance_used=tol,
        params={"metric": "max_violation"},
    )


def set_from_config(cfg: dict, seed: int = 0) -> SetSpec:
    """Build a set from a plain mapping (``kind`` plus numeric fields)."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    try:
        if kind == "Ball":
            return Ball(cfg["center"], cfg["radius"])
        if kind == "Box":
            return Box(cfg["lo"], cfg["hi"])
        if kind == "Halfspace":
            return Halfspace(cfg["normal"], cfg["offset"])
        if kind == "ComplementOfBall":
            return ComplementOfBall(cfg["center"], cfg["radius"])
        if kind == "Union":
            members = tuple(set_from_config(m) for m in cfg["members"])
            return Union(members, cfg["gap"], seed=seed)
    except KeyError as exc:
        raise InvalidSet(f"{kind} is missing field {exc.args[0]!r}") from None
    raise InvalidSet(f"unknown set kind {kind!r}")


CATALOG = [
    ("Ball", "center, radius", "prox_radius = inf (convex)"),
    ("Box", "lo, hi", "prox_radius = inf (convex)"),
    ("Halfspace", "normal (unit), offset", "prox_radius = inf (convex)"),
    ("ComplementOfBall", "center, radius", "prox_radius = radius"),
    ("Union", "members (convex sets), gap", "prox_radius = gap/2"),
]
