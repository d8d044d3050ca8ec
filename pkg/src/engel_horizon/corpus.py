"""Seeded random ε-Engel knots for the extension test suite.

Each knot starts as a random closed (x, w) curve shaped like a figure eight.
Two linear correction modes of w are solved so that the Lagrangian lift has
prescribed holonomy (dz, dy), both at most ``defect`` in size. The lift is
then closed formally by subtracting dz and dy with a smooth step over one
random arc on which x is monotone. Outside that arc the curve is exactly a discrete Lagrangian lift
(angle at round-off level); on the arc the relation holds only up to a small
angle.
"""

from __future__ import annotations

import numpy as np

from ._numerics import cumtrapz, loop_integral, smoothstep
from .core_geometry import DiscreteCurve, curve_angles, embeddedness_check, is_generic_knot

DEFAULT_SAMPLES = 4096
MAX_DEFECT = 0.02
MAX_DRAWS = 64
MIN_MARGIN = 0.01


def _draw(rng: np.random.Generator, n: int, defect: float) -> DiscreteCurve:
    t = np.arange(n) / n
    tau = 2 * np.pi * t
    start = rng.uniform(0.05, 0.45)
    length = rng.uniform(0.3, 0.45)
    # the re-closing arc sits where x is steepest, away from its turning points
    p1 = np.pi / 2 - 2 * np.pi * (start + length / 2) + rng.uniform(-0.2, 0.2)
    p2 = rng.uniform(0, 2 * np.pi)
    a = rng.uniform(0.4, 0.8)
    x = np.cos(tau + p1)
    w = a * np.sin(2 * tau + p2)
    for k in (2, 3):
        x = x + rng.uniform(-0.06, 0.06) * np.cos(k * tau + rng.uniform(0, 2 * np.pi))
        w = w + rng.uniform(-0.06, 0.06) * np.sin((k + 1) * tau + rng.uniform(0, 2 * np.pi))
    # one mode moves dz only, the other dy only (for the leading x = cos u)
    modes = [np.sin(tau + p1), np.sin(2 * (tau + p1))]
    dz, dy = rng.uniform(-defect, defect, 2)
    ramp = smoothstep((t - start) / length)

    def holonomy(wv):
        z = cumtrapz(wv, x) - dz * ramp
        return np.array([loop_integral(wv, x), loop_integral(z, x)])

    h0 = holonomy(w)
    M = np.column_stack([holonomy(w + m) - h0 for m in modes])
    coef = np.linalg.solve(M, np.array([dz, dy]) - h0)
    w = w + modes[0] * coef[0] + modes[1] * coef[1]
    z = cumtrapz(w, x) - dz * ramp
    y = cumtrapz(z, x) - dy * ramp
    return DiscreteCurve(np.column_stack([x, y, z, w]), True, t)


def corpus_curve(seed: int, index: int, eps: float = 0.2, n: int = DEFAULT_SAMPLES, defect: float = MAX_DEFECT) -> DiscreteCurve:
    """Curve ``index`` of the corpus for ``seed``; redraws until it is ε-Engel, generic and embedded with margin."""
    rng = np.random.default_rng([seed, index])
    for _ in range(MAX_DRAWS):
        c = _draw(rng, n, defect)
        if np.max(curve_angles(c)) <= eps and embeddedness_check(c) >= MIN_MARGIN and is_generic_knot(c):
            return c
    raise RuntimeError("could not draw a valid corpus curve")


def corpus(count: int, seed: int = 42, eps: float = 0.2, n: int = DEFAULT_SAMPLES) -> list:
    if count < 1:
        raise ValueError("count must be at least 1")
    return [corpus_curve(seed, i, eps, n) for i in range(count)]
