"""Structured experiment results.

A :class:`Report` carries its rows, the tolerance and the name of the rule
that decides pass/fail. ``passed`` is always recomputed from those fields,
so a report read back from disk gives the same verdict.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Callable

Row = tuple[str, dict[str, float]]


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def _column(rows: list[Row], metric: str) -> list[float]:
    return [values[metric] for _, values in rows if metric in values]


def _rule_info(rows, tol, params):
    return True


def _rule_max_leq(rows, tol, params):
    col = _column(rows, params["metric"])
    return bool(col) and max(col) <= tol


def _rule_final_leq(rows, tol, params):
    col = _column(rows, params["metric"])
    return bool(col) and col[-1] <= tol


def _rule_shrinking(rows, tol, params):
    """Nonincreasing column; or a final value already at tolerance."""
    col = _column(rows, params["metric"])
    if not col:
        return False
    if col[-1] <= tol:
        return True
    return all(b < a for a, b in zip(col, col[1:]))


def _factors(col):
    return [a / b for a, b in zip(col, col[1:]) if b > 0]


def _rule_factor_range(rows, tol, params):
    """Every listed metric is either identically <= tol or shrinks by a mean
    factor inside [lo, hi] per row."""
    lo, hi = params["lo"], params["hi"]
    for metric in params["metrics"].split(","):
        col = _column(rows, metric)
        if not col:
            return False
        if max(col) <= tol:
            continue
        if min(col) <= 0:
            return False
        factors = _factors(col)
        mean = math.exp(sum(math.log(f) for f in factors) / len(factors))
        if not lo <= mean <= hi:
            return False
    return True


def _rule_continuity(rows, tol, params):
    out = _column(rows, "output_distance")
    inp = _column(rows, "input_distance")
    if not out:
        return False
    noise = params.get("noise", 0.05)
    floor = params.get("floor", 0.0)
    for a, b in zip(out, out[1:]):
        if b > (1.0 + noise) * a + floor:
            return False
    return out[-1] <= tol * (inp[-1] + params.get("grid_gap", 0.0)) + floor


def _rule_order_band(rows, tol, params):
    col = [p for p in _column(rows, "order") if math.isfinite(p)]
    target = params["expected_order"]
    return bool(col) and all(abs(p - target) <= tol for p in col)


RULES: dict[str, Callable[[list[Row], float, dict[str, Any]], bool]] = {
    "info": _rule_info,
    "max_leq": _rule_max_leq,
    "final_leq": _rule_final_leq,
    "shrinking": _rule_shrinking,
    "factor_range": _rule_factor_range,
    "continuity": _rule_continuity,
    "order_band": _rule_order_band,
}


@dataclass
class Report:
    name: str
    rule: str
    rows: list[Row]
    tolerance_used: float
    params: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(RULES[self.rule](self.rows, self.tolerance_used, self.params))

    def row(self, label: str) -> dict[str, float]:
        for lab, values in self.rows:
            if lab == label:
                return values
        raise KeyError(label)

    def column(self, metric: str) -> list[float]:
        return _column(self.rows, metric)

    def to_text(self) -> str:
        lines = [
            f"report = {self.name}",
            f"rule = {self.rule}",
            f"tolerance = {fmt(self.tolerance_used)}",
        ]
        for key in sorted(self.params):
            value = self.params[key]
            lines.append(f"param.{key} = {fmt(value) if isinstance(value, float) else value}")
        for label, values in self.rows:
            for metric, value in values.items():
                lines.append(f"{label}.{metric} = {fmt(value)}")
        for note in self.notes:
            lines.append(f"note = {note}")
        lines.append(f"pass = {str(self.passed).lower()}")
        return "\n".join(lines) + "\n"

    def csv_rows(self, prefix: str = "") -> list[tuple[str, str, str]]:
        out = []
        for label, values in self.rows:
            for metric, value in values.items():
                out.append((prefix + label, metric, fmt(value)))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", "metric", "value"])
        writer.writerows(self.csv_rows())
        return buf.getvalue()
