"""Local curve surgery: integrate-and-blend, wrinkles, and area controllers.

Every operation returns a new value and leaves samples outside its declared
support bit-identical.

Kink template
-------------
On a parameter window ``|t - center| < width`` with ``s = (t - center)/width``
and ψ the standard bump, a kink displaces the front by

    x ↦ x + r ψ(s) sin(πs),        w ↦ w + height·ψ(s) cos(πs) + Σ c_k ψ(s) P_k(s),

and integrates z = ∫ w dx across the window. The loop radius ``r`` is large
enough to reverse x (a Reidemeister I loop in the (x, w) plane, a zigzag with
two cusps in the front); the slope w stays finite throughout. The free
coefficients c_k are solved so that z re-joins the base front exactly at the
window end and the front area ∫ z dx changes by the requested amount.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._lift_solver import solve_lift
from ._numerics import bump, cumtrapz, derivative, smoothstep
from .core_geometry import DiscreteCurve, tangency_angles
from .errors import (
    CapacityError,
    ConstraintViolation,
    CuspError,
    InvalidWindowError,
    KinkLookupError,
    PlacementError,
)
from .projections import X_MIN_SLOPE, Front

LOOP_REVERSAL = 0.75
MAX_AREA_RATIO = 1.0

POSITION_TOL = 1e-4
SLOPE_TOL = 1e-3
PARAM_SEPARATION = 0.05
Y_SEP_TOL = 1e-6


@dataclass(frozen=True)
class BlendWindow:
    a: float
    b: float
    delta: float

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidWindowError("window needs a < b")
        if self.delta <= 0:
            raise InvalidWindowError("collar width must be positive")

    @property
    def support(self):
        return self.a - self.delta, self.b + self.delta


@dataclass(frozen=True)
class KinkSpec:
    center: float
    width: float
    height: float = 0.0
    area: float = 0.0

    def __post_init__(self):
        if self.width <= 0:
            raise PlacementError("kink width must be positive")


@dataclass(frozen=True)
class AreaController:
    plus: KinkSpec
    minus: KinkSpec

    @property
    def base_area(self) -> float:
        return -self.minus.area


@dataclass(frozen=True, eq=False)
class AppliedKink:
    spec: KinkSpec
    indices: tuple
    base_points: np.ndarray
    base_slope: np.ndarray
    coeffs: np.ndarray
    nested: bool = False


# ---------------------------------------------------------------------------
# parameter windows


def signed_offset(t, center, closed):
    d = np.asarray(t, dtype=float) - center
    return (d + 0.5) % 1.0 - 0.5 if closed else d


def window_indices(params: np.ndarray, lo: float, hi: float, closed: bool) -> np.ndarray:
    """Sample indices with parameter in [lo, hi], in traversal order.

    For closed curves ``lo`` and ``hi`` are read on the universal cover, so a
    window may straddle t = 0.
    """
    if closed:
        off = (params - lo) % 1.0
        inside = np.flatnonzero(off <= hi - lo + 1e-15)
        return inside[np.argsort(off[inside], kind="stable")]
    return np.flatnonzero((params >= lo - 1e-15) & (params <= hi + 1e-15))


def _local_params(params, idx, closed):
    t = params[idx].astype(float)
    if closed:
        t = t[0] + np.concatenate([[0.0], np.cumsum(np.diff(t) % 1.0)])
    return t


def template_shapes(s: np.ndarray) -> tuple:
    """(x-offset shape, prescribed loop slope shape, free slope shapes)."""
    psi = bump(s)
    ps = np.pi * s
    free = np.column_stack([psi, psi * np.sin(ps), psi * np.cos(2 * ps), psi * np.sin(2 * ps)])
    return psi * np.sin(ps), psi * np.cos(ps), free


# ---------------------------------------------------------------------------
# integrate-and-blend


def make_engel_near(c: DiscreteCurve, window: BlendWindow, eps: float = np.pi / 4) -> DiscreteCurve:
    """Make ``c`` Engel on [a, b] by integrating its (x, w) data, blending back on the collars.

    On [a, b] the (z, y) coordinates become the Lagrangian lift seeded at
    (z(a), y(a)); on each collar the output is λγ + (1-λ)γ̃ with a smooth λ
    equal to 1 at the outer edge and 0 at the inner edge.
    """
    lo, hi = window.support
    t = c.params
    if not c.closed:
        if lo <= t[0] or hi >= t[-1]:
            raise InvalidWindowError("window touches the ends of an open arc")
    elif hi - lo >= 1.0:
        raise InvalidWindowError("window wraps over the whole curve")
    idx = window_indices(t, lo, hi, c.closed)
    if idx.size < 4:
        raise InvalidWindowError("window contains too few samples")
    pts = c.points
    tau = _local_params(t, idx, c.closed)
    if c.closed:
        tau = tau - tau[0] + lo + ((t[idx[0]] - lo) % 1.0)
    local = pts[idx]
    ang = tangency_angles(local, derivative(pts, t, c.closed)[idx])
    if np.max(ang) >= eps:
        raise ConstraintViolation(f"curve is not {eps:.3g}-Engel on the window (max angle {np.max(ang):.3g})")
    inner = np.flatnonzero((tau >= window.a) & (tau <= window.b))
    if inner.size == 0:
        raise InvalidWindowError("inner window contains no samples")
    ia = inner[0]
    x, w = local[:, 0], local[:, 3]
    zl = cumtrapz(w, x)
    zl = local[ia, 2] + zl - zl[ia]
    yl = cumtrapz(zl, x)
    yl = local[ia, 1] + yl - yl[ia]
    lam = np.where(
        tau < window.a,
        1.0 - smoothstep((tau - lo) / window.delta),
        np.where(tau > window.b, smoothstep((tau - window.b) / window.delta), 0.0),
    )
    out = pts.copy()
    out[idx, 1] = lam * local[:, 1] + (1 - lam) * yl
    out[idx, 2] = lam * local[:, 2] + (1 - lam) * zl
    return c.with_points(out)


# ---------------------------------------------------------------------------
# kinks on fronts


def _support(front: Front, spec: KinkSpec) -> np.ndarray:
    t = front.params
    idx = window_indices(t, spec.center - spec.width, spec.center + spec.width, front.closed)
    s = signed_offset(t[idx], spec.center, front.closed) / spec.width
    idx = idx[np.abs(s) < 1.0]
    if idx.size < 8:
        raise PlacementError("kink support holds fewer than 8 samples")
    n = len(front)
    if not front.closed and (idx[0] == 0 or idx[-1] == n - 1):
        raise PlacementError("kink support touches the ends of an open front")
    return idx


def _with_anchors(idx, n, closed):
    before = (idx[0] - 1) % n if closed else idx[0] - 1
    after = (idx[-1] + 1) % n if closed else idx[-1] + 1
    return np.concatenate([[before], idx, [after]])


def _full_slope(front: Front) -> np.ndarray:
    if front.slope is not None:
        return front.slope
    d = derivative(front.points, front.params, front.closed)
    with np.errstate(divide="ignore", invalid="ignore"):
        return d[:, 1] / d[:, 0]


def _solve_kink(front_x, front_z, slope, params_local, spec: KinkSpec, closed):
    """Template samples (x, z, w) over local samples including both anchors."""
    s = signed_offset(params_local, spec.center, closed) / spec.width
    xs, loop, free = template_shapes(s)
    dxdt = np.gradient(front_x, params_local)
    r = LOOP_REVERSAL * spec.width * np.max(np.abs(dxdt))
    x_new = front_x + r * xs
    u_base = slope + spec.height * loop
    area_cum = cumtrapz(front_z, front_x)
    sol = solve_lift(
        x_new,
        u_base,
        free,
        targets=[front_z, area_cum],
        seeds=[front_z[0], 0.0],
        end_targets=[front_z[-1], area_cum[-1] + spec.area],
    )
    return x_new, sol.levels[0], sol.u, sol.coeffs


def _overlaps(a: KinkSpec, b: KinkSpec, closed: bool) -> bool:
    d = abs(signed_offset(a.center, b.center, closed))
    return d < a.width + b.width - 1e-12  # touching supports are adjacent, not overlapping


def _contains(outer: KinkSpec, inner: KinkSpec, closed: bool) -> bool:
    d = abs(signed_offset(inner.center, outer.center, closed))
    return d + inner.width <= outer.width


def _apply(front: Front, spec: KinkSpec, nested: bool, base_points=None, base_slope=None, idx=None) -> tuple:
    n = len(front)
    if idx is None:
        idx = _support(front, spec)
    loc = _with_anchors(idx, n, front.closed)
    slope_full = _full_slope(front)
    if base_points is None:
        base_points = front.points[loc].copy()
        base_slope = slope_full[loc].copy()
        d = np.gradient(base_points[:, 0], _local_params(front.params, loc, front.closed))
        if np.min(np.abs(d)) < X_MIN_SLOPE or not np.all(np.isfinite(base_slope)):
            raise CuspError("kink base segment is not graphical", float(front.params[idx[np.argmin(np.abs(d[1:-1]))]]))
    tl = _local_params(front.params, loc, front.closed)
    x_new, z_new, u_new, coeffs = _solve_kink(base_points[:, 0], base_points[:, 1], base_slope, tl, spec, front.closed)
    pts = front.points.copy()
    slope = np.array(slope_full, dtype=float)
    pts[idx, 0] = x_new[1:-1]
    pts[idx, 1] = z_new[1:-1]
    slope[idx] = u_new[1:-1]
    entry = AppliedKink(spec, tuple(int(i) for i in idx), base_points, base_slope, coeffs, nested)
    return pts, slope, entry


def insert_kink(f: Front, spec: KinkSpec, nested: bool = False) -> Front:
    """Insert a Reidemeister I wrinkle whose front area change equals ``spec.area``."""
    for k in f.kinks:
        if _overlaps(k.spec, spec, f.closed) and not (nested and _contains(k.spec, spec, f.closed)):
            raise PlacementError(f"kink at {spec.center:.6g} overlaps the kink at {k.spec.center:.6g}")
    pts, slope, entry = _apply(f, spec, nested)
    return Front(pts, f.closed, f.params, slope, f.kinks + (entry,))


def _find(f: Front, kink: KinkSpec) -> int:
    for i, k in enumerate(f.kinks):
        if k.spec == kink:
            return i
    raise KinkLookupError(f"no kink {kink} in this front")


def _reapply(f: Front, i: int, spec: KinkSpec) -> Front:
    old = f.kinks[i]
    idx = np.array(old.indices)
    pts, slope, entry = _apply(f, spec, old.nested, old.base_points, old.base_slope, idx)
    kinks = f.kinks[:i] + (entry,) + f.kinks[i + 1:]
    return Front(pts, f.closed, f.params, slope, kinks)


def kink_slope_range(f: Front, kink: KinkSpec) -> tuple:
    k = f.kinks[_find(f, kink)]
    s = f.slope[list(k.indices)]
    return float(np.min(s)), float(np.max(s))


def enlarge_wrinkle(f: Front, kink: KinkSpec, target_slope: float) -> Front:
    """Grow the loop until its slope range covers [-|target|, |target|].

    The z match at the window end and the front area are kept, so the
    reported area change is zero.
    """
    i = _find(f, kink)
    T = abs(float(target_slope))
    if T == 0.0:
        return f

    def covers(front, spec):
        lo, hi = kink_slope_range(front, spec)
        return lo <= -T and hi >= T

    if covers(f, kink):
        return f
    best = None
    for sign in (1.0, -1.0):
        h_lo, h = 0.0, max(T, 1e-3)
        ok = None
        for _ in range(60):
            spec = replace(kink, height=sign * h)
            cand = _reapply(f, i, spec)
            if covers(cand, spec):
                ok = (h, cand)
                break
            h_lo, h = h, 2 * h
        if ok is None:
            continue
        h_hi, cand = ok
        for _ in range(40):
            mid = 0.5 * (h_lo + h_hi)
            spec = replace(kink, height=sign * mid)
            trial = _reapply(f, i, spec)
            if covers(trial, spec):
                h_hi, cand = mid, trial
            else:
                h_lo = mid
        if best is None or h_hi < best[0]:
            best = (h_hi, cand)
    if best is None:
        raise ConstraintViolation("could not realise the target slope")
    return best[1]


def insert_area_controller(f: Front, at: float, A: float, width: float) -> tuple:
    """Insert two adjacent kinks of front area +A and -A around ``at``."""
    half = 0.5 * width
    plus = KinkSpec(at - half, half, 0.0, A)
    minus = KinkSpec(at + half, half, 0.0, -A)
    out = insert_kink(insert_kink(f, plus), minus)
    return out, AreaController(plus, minus)


def tune_area_controllers(
    f: Front, controllers: Sequence[AreaController], targets: Sequence[float], max_area_ratio: float = MAX_AREA_RATIO
) -> tuple:
    """Detune each controller to (A + target, -A); returns (front, updated controllers)."""
    if len(controllers) != len(targets):
        raise ValueError("one target per controller")
    out = f
    updated = []
    for i, (ctl, d) in enumerate(zip(controllers, targets)):
        cap = max_area_ratio * abs(ctl.base_area)
        if abs(d) > cap:
            raise CapacityError(f"target {d:.6g} exceeds capacity {cap:.6g} of controller {i}", controller=i)
        if d == 0:
            updated.append(ctl)
            continue
        j = _find(out, ctl.plus)
        spec = replace(ctl.plus, area=ctl.base_area + d)
        out = _reapply(out, j, spec)
        updated.append(AreaController(spec, ctl.minus))
    return out, updated


# ---------------------------------------------------------------------------
# embeddedness through y


def front_self_tangencies(
    f: Front, position_tol: float = POSITION_TOL, slope_tol: float = SLOPE_TOL, separation: float = PARAM_SEPARATION
) -> list:
    """Sample pairs (i, j), i < j, where the front touches itself with equal slope."""
    pts = f.points
    slope = f.slopes()
    t = f.params
    n = len(f)
    sq = np.sum(pts**2, axis=1)
    pairs = []
    for i0 in range(0, n, 512):
        i1 = min(n, i0 + 512)
        d2 = sq[i0:i1, None] + sq[None, :] - 2.0 * pts[i0:i1] @ pts.T
        for a, b in zip(*np.nonzero(d2 <= 4 * position_tol**2)):
            i, j = i0 + a, b
            if i >= j:
                continue
            dt = abs(t[i] - t[j])
            if f.closed:
                dt = min(dt, 1.0 - dt)
            if (
                dt >= separation
                and np.linalg.norm(pts[i] - pts[j]) <= position_tol
                and abs(slope[i] - slope[j]) <= slope_tol
            ):
                pairs.append((int(i), int(j)))
    return pairs


def self_tangency_y_separation(f: Front, y_values, y_sep_tol: float = Y_SEP_TOL, **tols) -> bool:
    """True iff the y values separate the two strands at every front self-tangency."""
    y = np.asarray(y_values, dtype=float)
    if y.shape != (len(f),):
        raise ValueError("one y value per front sample")
    return all(abs(y[i] - y[j]) > y_sep_tol for i, j in front_self_tangencies(f, **tols))
