"""Legendrian curves in (ℝ³, ker(dz - y dx)) through their Lagrangian projection.

The z coordinate of a Legendrian curve is the action z = z0 + ∫ y dx of its
(x, y) projection, so a closed projection lifts to a closed curve only when
its signed area ∮ y dx vanishes. Stabilizations are small curls inserted in
the (x, y) plane; each one turns the planar tangent once more (by its sign)
and carries a tunable signed area.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._lift_solver import solve_lift
from ._numerics import cumtrapz, derivative, smoothstep
from .core_geometry import MIN_SAMPLES, DiscreteCurve, _frozen, embeddedness_check, uniform_params
from .errors import BudgetError, ImmersionError, InvalidInputError, PlacementError, ResolutionError
from .surgery import signed_offset, window_indices

ROTATION_RESIDUAL = 0.05
CURL_MARGIN = 1.5
STAB_WIDTH = 0.02
CURL_CORE = 0.4
PAIR_CORE = 0.7
AMPLITUDE_SHARE = 0.75
DEFECT_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class LegendrianCurve:
    points: np.ndarray  # (N, 3): x, y, z
    closed: bool = False
    params: Optional[np.ndarray] = None
    stabilizations: tuple = ()  # (at, width, sign) of every inserted curl

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidInputError(f"expected (N, 3) samples, got shape {pts.shape}")
        if pts.shape[0] < MIN_SAMPLES:
            raise InvalidInputError(f"need at least {MIN_SAMPLES} samples")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("non-finite coordinates")
        t = uniform_params(pts.shape[0], self.closed) if self.params is None else _frozen(self.params)
        if t.shape != (pts.shape[0],) or np.any(np.diff(t) <= 0):
            raise InvalidInputError("params must be strictly increasing and match the samples")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "params", t)

    def __len__(self):
        return self.points.shape[0]

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]

    @property
    def z(self):
        return self.points[:, 2]

    def tangents(self) -> np.ndarray:
        return derivative(self.points, self.params, self.closed)

    def with_points(self, points, stabilizations=None) -> "LegendrianCurve":
        stabs = self.stabilizations if stabilizations is None else stabilizations
        return LegendrianCurve(points, self.closed, self.params, stabs)


@dataclass(frozen=True)
class StabilizationRecord:
    count_plus: int = 0
    count_minus: int = 0
    locations: tuple = ()

    def __post_init__(self):
        if self.count_plus < 0 or self.count_minus < 0:
            raise ValueError("stabilization counts are non-negative")

    @property
    def total(self) -> int:
        return self.count_plus + self.count_minus

    def add(self, at: float, sign: int) -> "StabilizationRecord":
        return StabilizationRecord(
            self.count_plus + (sign > 0), self.count_minus + (sign < 0), self.locations + (float(at),)
        )

    def to_dict(self) -> dict:
        return {"count_plus": self.count_plus, "count_minus": self.count_minus, "locations": list(self.locations)}


def legendrian_defect(c: LegendrianCurve) -> tuple:
    """Per-sample |z' - y x'| and its maximum."""
    d = c.tangents()
    r = np.abs(d[:, 2] - c.y * d[:, 0])
    return r, float(np.max(r))


def contact_angles(c: LegendrianCurve) -> np.ndarray:
    """Angle between the tangent and the contact plane at every sample."""
    d = c.tangents()
    num = np.abs(d[:, 2] - c.y * d[:, 0])
    den = np.linalg.norm(d, axis=1) * np.sqrt(1.0 + c.y**2)
    return np.arcsin(np.clip(num / den, 0.0, 1.0))


def action_lift(planar, z0: float = 0.0, t0: Optional[float] = None, closed: bool = False, params=None) -> LegendrianCurve:
    """Legendrian lift of an (x, y) curve: z = z0 + ∫_{t0} y dx."""
    p = np.asarray(planar, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise InvalidInputError("planar samples must have shape (N, 2)")
    t = uniform_params(p.shape[0], closed) if params is None else np.asarray(params, dtype=float)
    z = cumtrapz(p[:, 1], p[:, 0])
    t0 = float(t[0]) if t0 is None else t0
    z = z0 + z - float(np.interp(t0, t, z))
    return LegendrianCurve(np.column_stack([p, z]), closed, t)


def z_closure_defect(c: LegendrianCurve) -> float:
    """∮ y dx of a closed projection: the amount by which the action lift fails to close."""
    if not c.closed:
        raise InvalidInputError("closure defect needs a closed curve")
    x, y = c.x, c.y
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)) + 0.5 * (y[-1] + y[0]) * (x[0] - x[-1]))


def rotation_number(c: LegendrianCurve) -> int:
    """Winding number of the planar tangent (x', y') of a closed curve."""
    if not c.closed:
        raise InvalidInputError("rotation number needs a closed curve")
    d = c.tangents()[:, :2]
    speed = np.linalg.norm(d, axis=1)
    if np.min(speed) <= 1e-12 * max(np.max(speed), 1e-300):
        raise ImmersionError("Lagrangian projection is not immersed")
    phi = np.arctan2(d[:, 1], d[:, 0])
    steps = np.diff(np.concatenate([phi, phi[:1]]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    total = float(np.sum(steps)) / (2 * np.pi)
    k = int(round(total))
    if abs(total - k) > ROTATION_RESIDUAL:
        raise ImmersionError(f"turning number {total:.3f} is not close to an integer")
    return k


# ---------------------------------------------------------------------------
# curls


def _phase_rate(core: float = CURL_CORE) -> float:
    """Peak of dφ/d(offset)/2π, attained at the curl centre."""
    h = 1e-6
    return float((curl_phase(h, core) - curl_phase(-h, core)) / (2 * h) / (2 * np.pi))


def curl_phase(offset, core: float = CURL_CORE) -> np.ndarray:
    """Curl angle φ: 0 before the core |offset| < core, 2π after it."""
    return 2 * np.pi * smoothstep((np.asarray(offset, dtype=float) + core) / (2 * core))


def plateau(offset, core: float = CURL_CORE) -> np.ndarray:
    """1 on the curl core, ramping to 0 at the support edges."""
    o = np.abs(np.asarray(offset, dtype=float))
    return 1.0 - smoothstep((o - core - 0.05) / (0.95 - core - 0.05))


def curl_offsets(offset: np.ndarray, sign: int, T: np.ndarray, r: float, core: float = CURL_CORE) -> np.ndarray:
    """(x, y) displacement of a curl along local parameter ``offset`` in [-1, 1].

    The displacement r (sin φ T + sign (1 - cos φ) N) traces a circle tangent
    to the base curve, counter-clockwise for sign +1.
    """
    N = np.array([-T[1], T[0]])
    phi = curl_phase(offset, core)
    a = np.sin(phi)
    b = sign * (1.0 - np.cos(phi))
    return r * (a[:, None] * T[None, :] + b[:, None] * N[None, :])


def _frame(c: LegendrianCurve, at: float) -> tuple:
    d = c.tangents()[:, :2]
    dt = signed_offset(c.params, at, c.closed)
    j = int(np.argmin(np.abs(dt)))
    T = d[j] / np.linalg.norm(d[j])
    return T, float(np.linalg.norm(d[j]))


def min_curl_radius(base_speed: float, width: float, core: float = CURL_CORE) -> float:
    """Smallest radius for which the curl out-runs the base curve (a genuine loop)."""
    return CURL_MARGIN * base_speed * width / (2 * np.pi * _phase_rate(core))


def stabilize(
    c: LegendrianCurve, at: float, sign: int, area: float, width: float = STAB_WIDTH, record: Optional[StabilizationRecord] = None
) -> tuple:
    """Insert one curl at ``at`` whose support changes ∮ y dx by ``sign·area``."""
    if sign not in (1, -1):
        raise InvalidInputError("sign must be +1 or -1")
    for a0, w0, _ in c.stabilizations:
        if abs(signed_offset(at, a0, c.closed)) < width + w0:
            raise PlacementError(f"stabilization at {at:.6g} overlaps the one at {a0:.6g}")
    t = c.params
    idx = window_indices(t, at - width, at + width, c.closed)
    s = signed_offset(t[idx], at, c.closed) / width
    idx, s = idx[np.abs(s) < 1.0], s[np.abs(s) < 1.0]
    n = len(c)
    if idx.size < 16:
        raise PlacementError("stabilization support holds fewer than 16 samples")
    if not c.closed and (idx[0] == 0 or idx[-1] == n - 1):
        raise PlacementError("stabilization support touches the ends of an open curve")
    loc = np.concatenate([[(idx[0] - 1) % n], idx, [(idx[-1] + 1) % n]])
    sl = np.concatenate([[-1.0], s, [1.0]])
    T, speed = _frame(c, at)
    r = min_curl_radius(speed, width)
    xy = c.points[loc, :2] + curl_offsets(sl, sign, T, r)
    # translating the curl along the normal by k·shape changes the action by
    # k·gain exactly: the k² term is ∫ shape d(shape), which vanishes on the support
    shape = plateau(sl)
    nrm = np.array([-T[1], T[0]])
    base = cumtrapz(xy[:, 1], xy[:, 0])[-1] - cumtrapz(c.y[loc], c.x[loc])[-1]
    gain = nrm[1] * cumtrapz(shape, xy[:, 0])[-1] - nrm[0] * cumtrapz(shape, xy[:, 1])[-1]
    if abs(gain) < 1e-9:
        raise PlacementError("stabilization support is too short to carry the requested area")
    xy += np.outer(shape, nrm) * ((sign * area - base) / gain)
    z = c.z[loc[0]] + cumtrapz(xy[:, 1], xy[:, 0])
    # the action gained on the support is ramped out so z re-joins the base curve
    z -= (z[-1] - c.z[loc[-1]]) * smoothstep((sl + 1.0) / 2.0)
    pts = np.array(c.points)
    pts[idx, :2] = xy[1:-1]
    pts[idx, 2] = z[1:-1]
    rec = (record or StabilizationRecord()).add(at, sign)
    return c.with_points(pts, c.stabilizations + ((float(at), float(width), int(sign)),)), rec


# ---------------------------------------------------------------------------
# closing the action


def _embedded(c: LegendrianCurve) -> float:
    pad = np.column_stack([c.points, np.zeros(len(c))])
    return embeddedness_check(DiscreteCurve(pad, c.closed, c.params))


def pair_count(defect: float, eta: float) -> int:
    """Fewest curl pairs whose enlarged curls stay below ``AMPLITUDE_SHARE·eta``.

    N curls of radius r carry πNr² of action and displace the curve by 2r,
    so cancelling an action defect D needs N ≥ 4|D| / (π (share·eta)²).
    """
    r = 0.5 * AMPLITUDE_SHARE * eta
    return max(2, int(np.ceil(abs(defect) / (np.pi * r * r))))


def legendrize(c: LegendrianCurve, eps: float, eta: float, N: Optional[int] = None, tol: float = DEFECT_TOL) -> tuple:
    """Legendrian knot within ``eta`` of the ε-Legendrian knot ``c``.

    Pairs of opposite curls (signs +, -) are placed around (2i+1)/2N, so the
    rotation number is unchanged. The radii of one sign are enlarged until the
    curl areas cancel the closure defect ∮ y dx; the remainder is closed
    exactly by shifting each curl in y, which keeps the action lift linear in
    the shift coefficients. ``N`` defaults to :func:`pair_count`.
    """
    if not c.closed:
        raise InvalidInputError("legendrize needs a closed curve")
    if np.max(contact_angles(c)) > eps:
        raise InvalidInputError(f"input is not {eps:.3g}-Legendrian")
    if _embedded(c) <= 0:
        raise InvalidInputError("input curve is not embedded")
    _, dmax = legendrian_defect(c)
    speed_x = float(np.max(np.abs(c.tangents()[:, 0])))
    if dmax <= tol * speed_x and abs(z_closure_defect(c)) <= 1e-8:
        return c, StabilizationRecord()
    need = -z_closure_defect(c)
    N = pair_count(need, eta) if N is None else int(N)
    t = c.params
    n = len(c)
    half = 0.9 / (4 * N)  # each curl of a pair
    d = c.tangents()[:, :2]
    # a curl of sign s and radius r adds about -s π r² to ∮ y dx
    grow = -1 if need > 0 else 1
    X = np.zeros((n, 2))
    cols = []
    rec = StabilizationRecord()
    stabs = []
    for i in range(N):
        centre = (2 * i + 1) / (2 * N)
        for sign, at in ((1, centre - half), (-1, centre + half)):
            off = signed_offset(t, at, True) / half
            on = np.abs(off) < 1.0
            if on.sum() < 16:
                raise PlacementError(f"curl support holds fewer than 16 samples; use N <= {n // 40}")
            T = d[int(np.argmin(np.abs(off)))]
            T = T / np.linalg.norm(T)
            r = min_curl_radius(float(np.max(np.linalg.norm(d[on], axis=1))), half, PAIR_CORE)
            if sign == grow:
                r = np.sqrt(r * r + abs(need) / (N * np.pi))
            if 2 * r > eta:
                raise BudgetError(f"curls need amplitude {2 * r:.3g} > eta", overshoot=2 * r - eta)
            X[on] += curl_offsets(off[on], sign, T, r, PAIR_CORE)
            cols.append(np.where(on, plateau(off, PAIR_CORE), 0.0))
            rec = rec.add(at, sign)
            stabs.append((float(at), float(half), sign))
    xt = c.x + X[:, 0]
    yb = c.y + X[:, 1]
    sol = solve_lift(xt, yb, np.column_stack(cols), [c.z], [c.z[0]], [c.z[0]], periodic=True, u_target=c.y)
    out = c.with_points(np.column_stack([xt, sol.u, sol.levels[0]]), tuple(stabs))
    dist = float(np.max(np.linalg.norm(out.points - c.points, axis=1)))
    if dist > eta:
        raise BudgetError(f"C0 distance {dist:.4g} exceeds eta={eta:.4g}", overshoot=dist - eta)
    _, dmax = legendrian_defect(out)
    scale = float(np.max(np.abs(out.tangents()[:, 0])))
    if dmax > tol * scale:
        raise ResolutionError(f"Legendrian residual {dmax / scale:.3g}·max|x'| on {n} samples; resample more finely")
    return out, rec
