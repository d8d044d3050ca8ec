"""The Geiges projection tower and its two lift recipes.

    (x, y, z, w) --π_G--> (x, z, w) --front--> (x, z)
                                   \\--lagrangian--> (x, w)

An Engel curve is recovered from its front by w = z'/x', y = ∫ z dx, and from
its Lagrangian projection by z = ∫ w dx, y = ∫ z dx.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._numerics import cumtrapz, derivative, loop_integral, wrap_step
from .core_geometry import MIN_SAMPLES, DiscreteCurve, _frozen, uniform_params
from .errors import CuspError, InvalidInputError

X_MIN_SLOPE = 1e-3


def _validate(obj, arity):
    pts = _frozen(obj.points)
    if pts.ndim != 2 or pts.shape[1] != arity:
        raise InvalidInputError(f"expected samples of arity {arity}, got shape {pts.shape}")
    if pts.shape[0] < MIN_SAMPLES:
        raise InvalidInputError(f"need at least {MIN_SAMPLES} samples")
    if not np.all(np.isfinite(pts)):
        raise InvalidInputError("non-finite coordinates")
    t = uniform_params(pts.shape[0], obj.closed) if obj.params is None else _frozen(obj.params)
    if t.shape != (pts.shape[0],) or np.any(np.diff(t) <= 0):
        raise InvalidInputError("params must be strictly increasing and match the samples")
    object.__setattr__(obj, "points", pts)
    object.__setattr__(obj, "params", t)


@dataclass(frozen=True, eq=False)
class GeigesCurve:
    points: np.ndarray  # (N, 3): x, z, w
    closed: bool = False
    params: Optional[np.ndarray] = None

    def __post_init__(self):
        _validate(self, 3)

    def __len__(self):
        return self.points.shape[0]

    def legendrian_defect(self) -> np.ndarray:
        """|z' - w x'| per sample (reported, not enforced)."""
        d = derivative(self.points, self.params, self.closed)
        return np.abs(d[:, 1] - self.points[:, 2] * d[:, 0])


@dataclass(frozen=True, eq=False)
class Front:
    """Front (x, z) of a Geiges curve.

    ``slope`` optionally carries the exact slope w of a front built by surgery
    (fronts with wrinkles have cusps, where z'/x' is a 0/0 quotient).
    ``kinks`` is the registry of templates inserted so far.
    """

    points: np.ndarray  # (N, 2): x, z
    closed: bool = False
    params: Optional[np.ndarray] = None
    slope: Optional[np.ndarray] = None
    kinks: tuple = ()

    def __post_init__(self):
        _validate(self, 2)
        if self.slope is not None:
            s = _frozen(self.slope)
            if s.shape != (len(self),):
                raise InvalidInputError("slope must have one value per sample")
            object.__setattr__(self, "slope", s)

    def __len__(self):
        return self.points.shape[0]

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def z(self):
        return self.points[:, 1]

    def slopes(self) -> np.ndarray:
        if self.slope is not None:
            return self.slope
        d = derivative(self.points, self.params, self.closed)
        return d[:, 1] / d[:, 0]


@dataclass(frozen=True, eq=False)
class LagrangianPlaneCurve:
    points: np.ndarray  # (N, 2): x, w
    closed: bool = False
    params: Optional[np.ndarray] = None

    def __post_init__(self):
        _validate(self, 2)

    def __len__(self):
        return self.points.shape[0]

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def w(self):
        return self.points[:, 1]


def geiges_project(c: DiscreteCurve) -> GeigesCurve:
    return GeigesCurve(c.points[:, [0, 2, 3]], c.closed, c.params)


def front_project(g: GeigesCurve) -> Front:
    return Front(g.points[:, :2], g.closed, g.params)


def lagrangian_project(g: GeigesCurve) -> LagrangianPlaneCurve:
    return LagrangianPlaneCurve(g.points[:, [0, 2]], g.closed, g.params)


def _anchor(values: np.ndarray, params: np.ndarray, t0: float) -> float:
    return float(np.interp(t0, params, values))


def front_lift(f: Front, y0: float = 0.0, t0: Optional[float] = None, x_min_slope: float = X_MIN_SLOPE) -> DiscreteCurve:
    """Engel curve over a front: w = z'/x' and y = y0 + ∫_{t0} z dx."""
    t0 = float(f.params[0]) if t0 is None else t0
    x, z = f.x, f.z
    if f.slope is None:
        d = derivative(f.points, f.params, f.closed)
        bad = np.abs(d[:, 0]) < x_min_slope
        if bad.any():
            raise CuspError("front is not graphical (|x'| below x_min_slope)", float(f.params[np.argmax(bad)]))
        w = d[:, 1] / d[:, 0]
    else:
        w = f.slope
    y = cumtrapz(z, x)
    y = y0 + y - _anchor(y, f.params, t0)
    return DiscreteCurve(np.column_stack([x, y, z, w]), f.closed, f.params)


def lagrangian_lift(l: LagrangianPlaneCurve, z0: float = 0.0, y0: float = 0.0, t0: Optional[float] = None) -> DiscreteCurve:
    """Engel curve over an (x, w) curve: z = z0 + ∫ w dx, then y = y0 + ∫ z dx."""
    t0 = float(l.params[0]) if t0 is None else t0
    x, w = l.x, l.w
    z = cumtrapz(w, x)
    z = z0 + z - _anchor(z, l.params, t0)
    y = cumtrapz(z, x)
    y = y0 + y - _anchor(y, l.params, t0)
    return DiscreteCurve(np.column_stack([x, y, z, w]), l.closed, l.params)


def closure_defects(l: LagrangianPlaneCurve, z0: float = 0.0) -> tuple:
    """How far the Lagrangian lift of a closed (x, w) curve fails to close.

    dz = ∮ w dx; dy = ∮ z dx along the lift seeded at z0, the closing
    segment running from the last sample to the lifted end value z0 + dz.
    dy is canonical only when dz = 0.
    """
    if not l.closed:
        raise InvalidInputError("closure defects need a closed curve")
    x, w = l.x, l.w
    dz = loop_integral(w, x)
    z = z0 + cumtrapz(w, x)
    z_end = z[-1] + wrap_step(w, x)
    dy = float(np.sum(0.5 * (z[1:] + z[:-1]) * np.diff(x)) + 0.5 * (z[-1] + z_end) * (x[0] - x[-1]))
    return float(dz), dy
