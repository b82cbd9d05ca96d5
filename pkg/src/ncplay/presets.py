"""Closed-form input paths sampled as polylines.

ramp          u(t) = start + (end - start) t / T
zigzag        nodes t_j = j T / (2 teeth), values 0, A, 0, A, ..., 0 (times ``direction``)
circle_arc    u(t) = center + radius (cos th, sin th), th = angle0 + (angle1 - angle0) t / T
lissajous     u(t) = (ax sin(fx t + phase), ay sin(fy t))
sliding       u(t) = x(t) + y(t) with x(t) = c + R (cos wt, sin wt) and
              y(t) = s a (sin wt, 1 - cos wt) / w, s = -1 for the exterior of
              the ball (push into the hole), s = +1 for the ball itself.

For ``sliding`` the pair (x, y) is the exact play/stop solution: x stays on
the circle, y' = s a n(x) is normal to the set at x, and x(0) = c + (R, 0).
"""
from __future__ import annotations

import numpy as np

from .bvcalc import Path


def _grid(T, n):
    if n < 2:
        raise ValueError("need at least two samples")
    t = np.linspace(0.0, T, n)
    t[-1] = T
    return t


def ramp(T=1.0, n=2, start=(0.0,), end=(1.0,)):
    t = _grid(T, n)
    a, b = np.atleast_1d(np.asarray(start, float)), np.atleast_1d(np.asarray(end, float))
    return Path(t, a + np.outer(t / T, b - a))


def zigzag(T=1.0, teeth=4, amplitude=1.0, direction=(1.0,)):
    t = _grid(T, 2 * teeth + 1)
    heights = amplitude * (np.arange(len(t)) % 2)
    return Path(t, np.outer(heights, np.atleast_1d(np.asarray(direction, float))))


def circle_arc(T=1.0, n=65, center=(0.0, 0.0), radius=1.0, angle0=0.0, angle1=np.pi):
    t = _grid(T, n)
    th = angle0 + (angle1 - angle0) * t / T
    c = np.asarray(center, float)
    return Path(t, c + radius * np.column_stack([np.cos(th), np.sin(th)]))


def lissajous(T=2 * np.pi, n=257, ax=1.0, ay=1.0, fx=1.0, fy=2.0, phase=np.pi / 2):
    t = _grid(T, n)
    return Path(t, np.column_stack([ax * np.sin(fx * t + phase), ay * np.sin(fy * t)]))


def sliding_exact(t, center=(0.0, 0.0), radius=1.0, rate=1.0, push=1.0, exterior=True):
    """Exact ``(u, y, x)`` values of the sliding solution at times ``t``."""
    t = np.asarray(t, float)
    c = np.asarray(center, float)
    sign = -1.0 if exterior else 1.0
    wt = rate * t
    x = c + radius * np.column_stack([np.cos(wt), np.sin(wt)])
    y = sign * push / rate * np.column_stack([np.sin(wt), 1.0 - np.cos(wt)])
    return x + y, y, x


def sliding(T=np.pi / 2, n=65, center=(0.0, 0.0), radius=1.0, rate=1.0, push=1.0, exterior=True):
    t = _grid(T, n)
    u, _, _ = sliding_exact(t, center, radius, rate, push, exterior)
    return Path(t, u)


PRESETS = {
    "ramp": ramp,
    "zigzag": zigzag,
    "circle_arc": circle_arc,
    "lissajous": lissajous,
    "sliding": sliding,
}
