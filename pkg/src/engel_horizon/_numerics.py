"""Shared discrete calculus: stencils, cumulative quadrature, cut-off functions."""

from __future__ import annotations

import numpy as np


def derivative(values: np.ndarray, params: np.ndarray, closed: bool) -> np.ndarray:
    """Second-order derivative of sampled values with respect to the parameter.

    Centered three-point stencils in the interior (nonuniform spacing allowed);
    periodic wrap when ``closed``, second-order one-sided stencils at the ends
    of an open arc.
    """
    values = np.asarray(values, dtype=float)
    params = np.asarray(params, dtype=float)
    if not closed:
        return np.gradient(values, params, axis=0, edge_order=2)
    hp = np.roll(params, -1) - params
    hm = params - np.roll(params, 1)
    hp[-1] += 1.0
    hm[0] += 1.0
    fp = np.roll(values, -1, axis=0)
    fm = np.roll(values, 1, axis=0)
    shape = (-1,) + (1,) * (values.ndim - 1)
    hp = hp.reshape(shape)
    hm = hm.reshape(shape)
    return (hm**2 * fp - hp**2 * fm + (hp**2 - hm**2) * values) / (hp * hm * (hp + hm))


def cumtrapz(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Cumulative trapezoidal integral of ``f dg`` along the samples, starting at 0."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    out = np.empty_like(f)
    out[0] = 0.0
    np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(g), out=out[1:])
    return out


def wrap_step(f: np.ndarray, g: np.ndarray) -> float:
    """Trapezoidal contribution of the closing segment (last sample -> first)."""
    return 0.5 * (f[-1] + f[0]) * (g[0] - g[-1])


def loop_integral(f: np.ndarray, g: np.ndarray) -> float:
    """Periodic trapezoidal integral of ``f dg`` over a closed sampled curve."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(g)) + wrap_step(f, g))


def smoothstep(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    a = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
    b = np.where(s < 1, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return a / (a + b)


def bump(s):
    """Standard C-infinity bump on (-1, 1), equal to 1 at the origin."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    out = np.zeros_like(s)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def circular_distance(a, b):
    """Distance on the unit circle between parameters in [0, 1)."""
    d = np.abs(np.subtract(a, b))
    return np.minimum(d, 1.0 - d)
