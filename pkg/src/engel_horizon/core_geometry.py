"""Engel geometry of the Darboux model (R^4(x, y, z, w), D_std).

D_std = ker(dy - z dx) ∩ ker(dz - w dx) is spanned by the frame

    X = ∂x + z ∂y + w ∂z,    W = ∂w,

and its kernel line field is ⟨∂w⟩. Angles are measured with the Euclidean
metric of the Darboux coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from ._numerics import derivative
from .errors import ConstraintViolation, InvalidInputError

TOL_ENGEL = 1e-3
MIN_SAMPLES = 16
RIGID_ANGLE = 1e-9
RIGID_RUN = 8


class Point4(NamedTuple):
    x: float
    y: float
    z: float
    w: float


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def uniform_params(n: int, closed: bool) -> np.ndarray:
    """Uniform grid on [0, 1): j/n when closed, on [0, 1]: j/(n-1) when open."""
    return np.arange(n) / n if closed else np.linspace(0.0, 1.0, n)


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Sampled curve in R^4 Darboux coordinates.

    ``points`` has shape (N, 4) with columns (x, y, z, w). A closed curve is
    treated periodically: sample 0 follows sample N-1 and the endpoint is not
    duplicated.
    """

    points: np.ndarray
    closed: bool = False
    params: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise InvalidInputError(f"points must have shape (N, 4), got {pts.shape}")
        n = pts.shape[0]
        if n < MIN_SAMPLES:
            raise InvalidInputError(f"need at least {MIN_SAMPLES} samples, got {n}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("non-finite coordinates")
        t = uniform_params(n, self.closed) if self.params is None else _frozen(self.params)
        if t.shape != (n,):
            raise InvalidInputError("params must match the sample count")
        if np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > 1 or (self.closed and t[-1] >= 1):
            raise InvalidInputError("params must be strictly increasing in [0, 1]")
        steps = np.diff(pts, axis=0)
        if self.closed:
            steps = np.vstack([steps, pts[0] - pts[-1]])
        if np.any(np.all(steps == 0, axis=1)):
            raise InvalidInputError("consecutive samples must be distinct")
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

    @property
    def w(self):
        return self.points[:, 3]

    def tangents(self) -> np.ndarray:
        return derivative(self.points, self.params, self.closed)

    def with_points(self, points) -> "DiscreteCurve":
        return DiscreteCurve(points, self.closed, self.params)

    @classmethod
    def from_function(cls, fn: Callable, n: int, closed: bool = False) -> "DiscreteCurve":
        """Sample ``fn(t) -> (x, y, z, w)`` (vectorized over t) on the uniform grid."""
        t = uniform_params(n, closed)
        return cls(np.column_stack([np.broadcast_to(c, t.shape) for c in fn(t)]), closed, t)


@dataclass(frozen=True, eq=False)
class FormalEngelKnot:
    """A curve together with the endpoint F1 of its formal derivative path.

    ``F1[j] = (a_j, b_j)`` expresses the target line a X + b W ⊂ D at sample j.
    """

    curve: DiscreteCurve
    F1: np.ndarray

    def __post_init__(self):
        f1 = _frozen(self.F1)
        if f1.shape != (len(self.curve), 2):
            raise InvalidInputError("F1 must have shape (N, 2)")
        norms = np.linalg.norm(f1, axis=1)
        if np.any(norms == 0):
            raise InvalidInputError("F1 must be nonzero at every sample")
        u = f1 / norms[:, None]
        nxt = np.roll(u, -1, axis=0) if self.curve.closed else u[1:]
        cur = u if self.curve.closed else u[:-1]
        jumps = np.arccos(np.clip(np.sum(cur * nxt, axis=1), -1.0, 1.0))
        if np.any(jumps >= np.pi / 2):
            raise InvalidInputError("F1 jumps by more than pi/2 between samples")
        object.__setattr__(self, "F1", f1)

    def line_vectors(self) -> np.ndarray:
        """F1 as ambient 4-vectors a X + b W."""
        X, W = engel_frame_arrays(self.curve.points)
        return self.F1[:, :1] * X + self.F1[:, 1:] * W


@dataclass(frozen=True)
class DefectReport:
    angles: np.ndarray
    max_angle: float
    closure_dz: float
    closure_dy: float
    min_separation: float
    c0_distance: Optional[float] = None

    def summary(self) -> dict:
        return {
            "max_angle": float(self.max_angle),
            "closure_dz": float(self.closure_dz),
            "closure_dy": float(self.closure_dy),
            "min_separation": float(self.min_separation),
            "c0_distance": None if self.c0_distance is None else float(self.c0_distance),
        }


@dataclass(frozen=True)
class TangencySet:
    """Parameter intervals where the tangent is close to the kernel ⟨∂w⟩.

    An interval ``(a, b)`` with ``a > b`` wraps through t = 0 on a closed
    curve. ``runs`` holds the matching (first sample index, sample count).
    """

    intervals: tuple = ()
    runs: tuple = ()
    n_samples: int = 0
    closed: bool = False

    def __len__(self):
        return len(self.intervals)

    def covers_all(self) -> bool:
        return len(self.runs) == 1 and self.runs[0][1] == self.n_samples

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_samples, dtype=bool)
        for start, count in self.runs:
            m[(start + np.arange(count)) % self.n_samples] = True
        return m


# ---------------------------------------------------------------------------
# frames and angles


def engel_frame(p) -> tuple:
    """Return the Darboux frame (X, W) of D_std at ``p``."""
    x, y, z, w = np.asarray(p, dtype=float)
    return np.array([1.0, z, w, 0.0]), np.array([0.0, 0.0, 0.0, 1.0])


def engel_frame_arrays(points: np.ndarray) -> tuple:
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    X = np.column_stack([np.ones(n), points[:, 2], points[:, 3], np.zeros(n)])
    W = np.zeros((n, 4))
    W[:, 3] = 1.0
    return X, W


def _orthonormal_D(points: np.ndarray) -> tuple:
    """Orthonormal basis (e1, e2) of D along ``points``; e2 = ∂w."""
    X, W = engel_frame_arrays(points)
    e1 = X / np.linalg.norm(X, axis=1, keepdims=True)
    return e1, W


def _split(points: np.ndarray, vectors: np.ndarray) -> tuple:
    """Decompose ``vectors`` into the D-component and the orthogonal residual."""
    e1, e2 = _orthonormal_D(points)
    a = np.sum(vectors * e1, axis=1, keepdims=True)
    b = vectors[:, 3:4]
    inside = a * e1 + b * e2
    return inside, vectors - inside


def tangency_angles(points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Principal angles in [0, pi/2] between each vector and D at each point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    inside, perp = _split(points, vectors)
    return np.arctan2(np.linalg.norm(perp, axis=1), np.linalg.norm(inside, axis=1))


def tangency_angle(p, v) -> float:
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise InvalidInputError("tangency_angle needs a nonzero vector")
    return float(tangency_angles(np.asarray(p, dtype=float)[None], v[None])[0])


def _jacobian(field: Callable, p: np.ndarray, h: float) -> np.ndarray:
    cols = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        cols.append((field(p + e) - field(p - e)) / (2 * h))
    return np.column_stack(cols)


def _bracket(A: Callable, B: Callable, h: float) -> Callable:
    # [A, B] = DB·A - DA·B
    return lambda p: _jacobian(B, p, h) @ A(p) - _jacobian(A, p, h) @ B(p)


def _std_X(p):
    return np.array([1.0, p[2], p[3], 0.0])


def _std_W(p):
    return np.array([0.0, 0.0, 0.0, 1.0])


def verify_engel_condition(p, h: float = 1e-4, frame: Optional[Sequence[Callable]] = None) -> bool:
    """Check numerically that {X, W, [X,W], [X,[X,W]]} spans R^4 at ``p``.

    ``frame`` substitutes another pair of frame fields (used to test
    degenerate plane fields).
    """
    if h <= 0:
        raise InvalidInputError("step size must be positive")
    Xf, Wf = frame if frame is not None else (_std_X, _std_W)
    p = np.asarray(p, dtype=float)
    XW = _bracket(Xf, Wf, h)
    XXW = _bracket(Xf, XW, h)
    M = np.column_stack([Xf(p), Wf(p), XW(p), XXW(p)])
    return bool(np.linalg.svd(M, compute_uv=False)[-1] > 10 * h)


# ---------------------------------------------------------------------------
# curve-level checks


def curve_angles(c: DiscreteCurve) -> np.ndarray:
    return tangency_angles(c.points, c.tangents())


def sup_distance(c: DiscreteCurve, reference: DiscreteCurve) -> float:
    """Largest distance between ``c`` and ``reference`` at matching parameters."""
    if len(c) == len(reference) and np.array_equal(c.params, reference.params):
        ref = reference.points
    else:
        t, rt, rp = c.params, reference.params, reference.points
        if reference.closed:
            rt = np.concatenate([rt, [1.0]])
            rp = np.vstack([rp, rp[:1]])
        ref = np.column_stack([np.interp(t, rt, rp[:, k]) for k in range(4)])
    return float(np.max(np.linalg.norm(c.points - ref, axis=1)))


def _pair_dt(ti, tj, closed):
    d = np.abs(ti - tj)
    return np.minimum(d, 1.0 - d) if closed else d


def _dense_min(pts, t, closed, cutoff):
    n = pts.shape[0]
    sq = np.sum(pts**2, axis=1)
    best, pair = np.inf, None
    for i0 in range(0, n, 512):
        i1 = min(n, i0 + 512)
        d2 = sq[i0:i1, None] + sq[None, :] - 2.0 * pts[i0:i1] @ pts.T
        d2[_pair_dt(t[i0:i1, None], t[None, :], closed) < cutoff] = np.inf
        k = int(np.argmin(d2))
        if d2.flat[k] < best:
            best, pair = d2.flat[k], (i0 + k // n, k % n)
    return np.sqrt(max(best, 0.0)), pair


def embeddedness_check(c: DiscreteCurve, t_sep: float = 0.05) -> float:
    """Smallest distance between samples at parameter distance >= ``t_sep``.

    Returns 0 when the curve is not locally injective (a degenerate chord).
    The search runs on every ``stride``-th sample first and then refines,
    exactly, every coarse pair that could still hide the minimum.
    """
    pts = c.points
    t = c.params
    n = len(c)
    steps = np.diff(pts, axis=0)
    if c.closed:
        steps = np.vstack([steps, pts[0] - pts[-1]])
    step_len = np.linalg.norm(steps, axis=1)
    if np.min(step_len) == 0:
        return 0.0
    cutoff = t_sep - 1e-12
    stride = 4 if n >= 1024 else 1
    if stride == 1:
        d, pair = _dense_min(pts, t, c.closed, cutoff)
        return float(d)
    coarse = np.arange(0, n, stride)
    dt_step = np.max(np.diff(t)) if not c.closed else max(np.max(np.diff(t)), 1.0 - t[-1] + t[0])
    slack_t = stride * dt_step
    dc, _ = _dense_min(pts[coarse], t[coarse], c.closed, cutoff - slack_t)
    reach = stride * np.max(step_len)  # a sample lies within reach/2 of a coarse one
    if not np.isfinite(dc):
        return float("inf")
    cand = []
    P = pts[coarse]
    sq = np.sum(P**2, axis=1)
    for i0 in range(0, coarse.size, 512):
        i1 = min(coarse.size, i0 + 512)
        d2 = sq[i0:i1, None] + sq[None, :] - 2.0 * P[i0:i1] @ P.T
        d2[_pair_dt(t[coarse][i0:i1, None], t[coarse][None, :], c.closed) < cutoff - slack_t] = np.inf
        a, b = np.nonzero(d2 <= (dc + reach) ** 2 + 1e-12)
        keep = a + i0 < b
        cand.append(np.column_stack([a[keep] + i0, b[keep]]))
    cand = np.vstack(cand)
    off = np.arange(-stride, stride + 1)
    best = np.inf
    for k0 in range(0, cand.shape[0], 2048):
        cb = cand[k0:k0 + 2048]
        I = coarse[cb[:, 0], None] + off[None, :]
        J = coarse[cb[:, 1], None] + off[None, :]
        if c.closed:
            I, J = I % n, J % n
        else:
            I, J = np.clip(I, 0, n - 1), np.clip(J, 0, n - 1)
        d = np.linalg.norm(pts[I][:, :, None, :] - pts[J][:, None, :, :], axis=3)
        d[_pair_dt(t[I][:, :, None], t[J][:, None, :], c.closed) < cutoff] = np.inf
        best = min(best, float(np.min(d)))
    return best


def curve_defect(c: DiscreteCurve, reference: Optional[DiscreteCurve] = None, t_sep: float = 0.05) -> DefectReport:
    from .projections import closure_defects, geiges_project, lagrangian_project

    angles = curve_angles(c)
    if c.closed:
        dz, dy = closure_defects(lagrangian_project(geiges_project(c)), float(c.z[0]))
    else:
        dz = dy = 0.0
    return DefectReport(
        angles=angles,
        max_angle=float(np.max(angles)),
        closure_dz=float(dz),
        closure_dy=float(dy),
        min_separation=embeddedness_check(c, t_sep),
        c0_distance=None if reference is None else sup_distance(c, reference),
    )


def is_epsilon_engel(c: DiscreteCurve, eps: float) -> bool:
    if not 0 <= eps < np.pi / 2:
        raise InvalidInputError("eps must lie in [0, pi/2)")
    return bool(np.max(curve_angles(c)) <= eps)


def kernel_angles(c: DiscreteCurve) -> np.ndarray:
    """Angle between the tangent and the kernel direction ∂w at every sample."""
    v = c.tangents()
    return np.arctan2(np.linalg.norm(v[:, :3], axis=1), np.abs(v[:, 3]))


def _runs(mask: np.ndarray, closed: bool) -> list:
    n = mask.size
    if not mask.any():
        return []
    if mask.all():
        return [(0, n)]
    idx = np.flatnonzero(np.diff(mask.astype(np.int8)))
    starts = list(idx[mask[idx + 1]] + 1)
    ends = list(idx[mask[idx]] + 1)
    if mask[0]:
        starts.insert(0, 0)
    if mask[-1]:
        ends.append(n)
    runs = [(s, e - s) for s, e in zip(starts, ends)]
    if closed and mask[0] and mask[-1] and len(runs) > 1:
        first = runs.pop(0)
        s, cnt = runs.pop()
        runs.append((s, cnt + first[1]))
    return sorted(runs)


def runs_of(mask: np.ndarray, closed: bool) -> list:
    """Maximal runs of True as (start index, count), wrapping when ``closed``."""
    return _runs(np.asarray(mask, dtype=bool), closed)


def kernel_tangency_set(c: DiscreteCurve, threshold: float) -> TangencySet:
    if not 0 < threshold < np.pi / 4:
        raise InvalidInputError("threshold must lie in (0, pi/4)")
    mask = kernel_angles(c) <= threshold
    runs = runs_of(mask, c.closed)
    t = c.params
    n = len(c)
    intervals = tuple((float(t[s]), float(t[(s + k - 1) % n])) for s, k in runs)
    return TangencySet(intervals=intervals, runs=tuple(runs), n_samples=n, closed=c.closed)


def is_generic_knot(c: DiscreteCurve, threshold: float = 0.1) -> bool:
    """False if the tangent stays near the kernel everywhere or runs along a kernel orbit.

    A run of ``RIGID_RUN`` consecutive samples with tangent exactly on ∂w
    (angle ≤ ``RIGID_ANGLE``) is an arc of a kernel orbit, not an isolated
    transverse tangency.
    """
    if not c.closed:
        raise InvalidInputError("genericity is defined for closed curves")
    if kernel_tangency_set(c, threshold).covers_all():
        return False
    rigid = runs_of(kernel_angles(c) <= RIGID_ANGLE, True)
    return not any(count >= RIGID_RUN for _, count in rigid)


def scanning(c: DiscreteCurve, tol: float = TOL_ENGEL) -> FormalEngelKnot:
    """The scanning map γ ↦ (γ, dγ), with dγ written in the frame {X, W}."""
    v = c.tangents()
    if np.max(tangency_angles(c.points, v)) > tol:
        raise ConstraintViolation("scanning needs an Engel curve")
    # X has x-component 1 and w-component 0, W = ∂w
    return FormalEngelKnot(c, np.column_stack([v[:, 0], v[:, 3]]))
