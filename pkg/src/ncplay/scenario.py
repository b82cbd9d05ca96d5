"""Scenario files: INI sections with ``key = value`` pairs.

Values are parsed as JSON when possible (numbers, inline arrays, objects),
otherwise kept as strings. Sections:

``[scenario]``  name, output_dir, z0
``[set]``       kind plus the variant fields (Union: members as a JSON list, gap)
``[input]``     preset + preset parameters, or times/values, or file (CSV)
``[solver]``    step_fraction, max_points, residual_targets (all optional)
``[experiment:<label>]``  kind plus parameters; randomized kinds need ``seed``
"""
from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any

import numpy as np

from . import geometry as geo
from . import presets
from .bvcalc import Path, from_csv, variation
from .errors import ConfigParseError, InitialConditionViolation, PlayError
from .playcore import SolverOptions, prerefined_size

MIN_LEVELS = {"rate_independence": 0, "normality": 2, "convergence_order": 3}

EXPERIMENT_KINDS = {
    "rate_independence": {"phi": "identity", "levels": 3, "tol": 1e-6},
    "normality": {"levels": 3},
    "continuity": {
        "mode": "bv",
        "n_terms": 16,
        "perturbation": "zigzag",
        "perturbation_args": {},
        "adaptive_tol": 1e-3,
        "factor": 10.0,
    },
    "convergence_order": {"levels": 3, "expected_order": None, "band": 0.3},
    "residuals": {"probe_fraction": 0.5, "tol": 1e-9, "corrupt_node": None, "corrupt_delta": 0.1},
    "prox_regularity": {"r": None, "n_boundary": 100, "n_targets": 100},
}
SEEDED = {"residuals", "prox_regularity"}


@dataclass
class Experiment:
    label: str
    kind: str
    params: dict[str, Any]
    seed: int | None = None


@dataclass
class Scenario:
    name: str
    set: geo.SetSpec
    input: Path
    z0: np.ndarray
    solver: SolverOptions
    experiments: list[Experiment] = field(default_factory=list)
    output_dir: str = "."
    source: str = ""


def _value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw.strip()


def _section(cp, name, required=True) -> dict[str, Any]:
    if not cp.has_section(name):
        if required:
            raise ConfigParseError(f"missing section [{name}]")
        return {}
    return {k: _value(v) for k, v in cp.items(name)}


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigParseError(f"missing key '{key}' in [{where}]")
    return d[key]


def _build_input(d: dict, base_dir: FsPath) -> Path:
    if "preset" in d:
        name = d.pop("preset")
        if name not in presets.PRESETS:
            raise ConfigParseError(f"unknown input preset '{name}' in [input]")
        try:
            return presets.PRESETS[name](**d)
        except TypeError as exc:
            raise ConfigParseError(f"bad parameters for preset '{name}' in [input]: {exc}") from None
    if "file" in d:
        return from_csv(base_dir / d["file"])
    times = _need(d, "times", "input")
    values = _need(d, "values", "input")
    return Path(np.asarray(times, float), np.asarray(values, float))


def load_scenario(
    path,
    output_dir: str | None = None,
    levels: int | None = None,
    seed: int | None = None,
) -> Scenario:
    path = FsPath(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from None

    head = _section(cp, "scenario")
    name = str(_need(head, "name", "scenario"))
    z0_raw = _need(head, "z0", "scenario")
    out = output_dir if output_dir is not None else str(head.get("output_dir", "."))

    set_cfg = _section(cp, "set")
    _need(set_cfg, "kind", "set")
    try:
        s = geo.set_from_config(set_cfg, seed=int(set_cfg.pop("seed", 0)))
    except PlayError as exc:
        raise ConfigParseError(f"[set]: {exc}") from None

    try:
        u = _build_input(_section(cp, "input"), path.parent)
    except PlayError as exc:
        raise ConfigParseError(f"[input]: {exc}") from None

    solver_cfg = _section(cp, "solver", required=False)
    unknown = set(solver_cfg) - {"step_fraction", "max_points", "residual_targets"}
    if unknown:
        raise ConfigParseError(f"unknown key '{sorted(unknown)[0]}' in [solver]")
    try:
        opts = SolverOptions(**solver_cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"[solver]: {exc}") from None

    try:
        z0 = geo.as_vec(z0_raw, s.dim)
    except (ValueError, PlayError) as exc:
        raise ConfigParseError(f"bad key 'z0' in [scenario]: {exc}") from None
    if u.dim != s.dim:
        raise ConfigParseError(f"[input] has dimension {u.dim} but [set] has dimension {s.dim}")
    if not geo.contains(s, z0):
        raise InitialConditionViolation(
            f"z0 = {z0.tolist()} is not in Z: the initial condition u(0) - y(0) = z0 "
            f"requires z0 in the characteristic set (distance {geo.distance(s, z0):.6g})"
        )

    experiments = []
    for sec in cp.sections():
        if not sec.startswith("experiment:"):
            continue
        label = sec.split(":", 1)[1].strip()
        cfg = _section(cp, sec)
        kind = _need(cfg, "kind", sec)
        if kind not in EXPERIMENT_KINDS:
            raise ConfigParseError(f"unknown experiment kind '{kind}' in [{sec}]")
        params = dict(EXPERIMENT_KINDS[kind])
        exp_seed = cfg.pop("seed", None)
        cfg.pop("kind")
        for key in cfg:
            if key not in params:
                raise ConfigParseError(f"unknown key '{key}' in [{sec}]")
        params.update(cfg)
        if levels is not None and "levels" in params:
            params["levels"] = levels
        if "levels" in params and int(params["levels"]) < MIN_LEVELS.get(kind, 0):
            raise ConfigParseError(
                f"bad key 'levels' in [{sec}]: {kind} needs at least {MIN_LEVELS[kind]}, got {params['levels']}"
            )
        if seed is not None:
            exp_seed = seed
        if exp_seed is None and (kind in SEEDED or params.get("phi") == "value_preserving"):
            raise ConfigParseError(f"missing key 'seed' in [{sec}]")
        experiments.append(Experiment(label, kind, params, None if exp_seed is None else int(exp_seed)))

    return Scenario(name, s, u, z0, opts, experiments, out, str(path))


def describe(sc: Scenario) -> list[str]:
    r = sc.set.prox_radius
    lines = [
        f"scenario: name={sc.name} output_dir={sc.output_dir}",
        f"set: kind={sc.set.kind} dim={sc.set.dim} prox_radius={'inf' if math.isinf(r) else format(r, '.17g')}",
        f"input: points={len(sc.input)} T={sc.input.T:.17g} variation={variation(sc.input):.17g} "
        f"prerefined_points={prerefined_size(sc.set, sc.input, sc.solver)}",
        f"z0: {sc.z0.tolist()} in Z",
        f"solver: step_fraction={sc.solver.step_fraction} max_points={sc.solver.max_points} "
        f"residual_targets={sc.solver.residual_targets}",
    ]
    for e in sc.experiments:
        lines.append(f"experiment: {e.label} kind={e.kind} seed={e.seed}")
    return lines

