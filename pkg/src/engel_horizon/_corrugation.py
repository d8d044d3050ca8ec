"""Corrugation construction for the ε-cone relation.

Where a formal knot's tangent leaves the ε-cone, or disagrees with its formal
line F₁, the curve is displaced by

    γ̃(t) = γ(t) + σ(t) (K/ω) [P₁(ωt) F̂(t) + P₂(ωt) Ĝ(t)],

with (F̂, Ĝ) an orthonormal pair spanning 𝒟 at γ(t), σ a cut-off and P a
periodic primitive of the unit vector v(θ(s)). The angle θ sweeps back and
forth over the half-turn [-β, π + β] around Ĝ, so the displacement is a
closed loop and to leading order the new tangent is γ' + σK v. Its 𝒟-part is
at least K cos β long while the normal part is unchanged, which puts the
tangent in the ε-cone once K is large enough. The frequency ω then sets the
amplitude K·max|P|/ω below the C⁰ budget.

Ĝ is the direction of the 𝒟-part of γ' nudged towards J F̂₁, so where γ'
has almost no 𝒟-part the corrugation runs along F̂ ≈ F̂₁.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from ._numerics import smoothstep
from .core_geometry import FormalEngelKnot, tangency_angles
from .errors import ResolutionError

SATURATION = 3.0
PROFILE_SAMPLES = 4096
MIN_SAMPLES_PER_PERIOD = 16
K_MARGIN = 1.5
AMPLITUDE_SHARE = 0.5
MISALIGNED = np.pi / 4
NUDGE = 1e-3


def _swing(s: np.ndarray) -> np.ndarray:
    return np.tanh(SATURATION * np.sin(2 * np.pi * s)) / np.tanh(SATURATION)


@lru_cache(maxsize=1)
def profile() -> tuple:
    """(beta, s grid, P on the grid (m, 2), v on the grid (m, 2))."""
    s = np.arange(PROFILE_SAMPLES) / PROFILE_SAMPLES
    g = _swing(s)

    def mean_sin(beta):
        return float(np.mean(np.cos((np.pi / 2 + beta) * g)))

    beta = brentq(mean_sin, 0.0, np.pi / 2)
    theta = np.pi / 2 + (np.pi / 2 + beta) * g
    v = np.column_stack([np.cos(theta), np.sin(theta)])
    v -= v.mean(axis=0)  # remove the O(1/m) quadrature residue
    P = np.vstack([np.zeros(2), np.cumsum(0.5 * (v[1:] + v[:-1]) / PROFILE_SAMPLES, axis=0)])
    P -= P.mean(axis=0)
    return beta, s, P, v


def _periodic_interp(phase: np.ndarray, s: np.ndarray, vals: np.ndarray) -> np.ndarray:
    ph = np.mod(phase, 1.0)
    sx = np.concatenate([s, [1.0]])
    vx = np.vstack([vals, vals[:1]])
    return np.column_stack([np.interp(ph, sx, vx[:, k]) for k in range(vals.shape[1])])


def _frames(points: np.ndarray, tang: np.ndarray, F1: np.ndarray) -> tuple:
    X = np.column_stack([np.ones(len(points)), points[:, 2], points[:, 3], np.zeros(len(points))])
    nX = np.linalg.norm(X, axis=1)
    e1 = X / nX[:, None]
    e2 = np.zeros_like(e1)
    e2[:, 3] = 1.0
    # coordinates in (e1, e2)
    f = np.column_stack([F1[:, 0] * nX, F1[:, 1]])
    f /= np.linalg.norm(f, axis=1)[:, None]
    d = np.column_stack([np.sum(tang * e1, axis=1), np.sum(tang * e2, axis=1)])
    Jf = np.column_stack([-f[:, 1], f[:, 0]])
    speed = np.linalg.norm(tang, axis=1)
    g = d + NUDGE * speed[:, None] * Jf
    g /= np.linalg.norm(g, axis=1)[:, None]
    fa = np.column_stack([g[:, 1], -g[:, 0]])  # F̂ = -J Ĝ
    G = g[:, :1] * e1 + g[:, 1:] * e2
    F = fa[:, :1] * e1 + fa[:, 1:] * e2
    return F, G, d, f


def _cutoff(bad: np.ndarray, params: np.ndarray, closed: bool, ramp: float) -> np.ndarray:
    if not bad.any():
        return np.zeros(bad.size)
    tb = params[bad]
    d = np.abs(params[:, None] - tb[None, :])
    if closed:
        d = np.minimum(d, 1.0 - d)
    dist = d.min(axis=1)
    return 1.0 - smoothstep(dist / ramp)


@dataclass
class Corrugation:
    curve: object
    frequency: float
    amplitude: float
    K: float
    support_fraction: float


def corrugate(fk: FormalEngelKnot, eps: float, eta: float) -> Corrugation:
    """Corrugate ``fk.curve`` into the ε-cone within C⁰ distance ``eta``."""
    c = fk.curve
    n = len(c)
    pts = c.points
    tang = c.tangents()
    ang = tangency_angles(pts, tang)
    F, G, d, f = _frames(pts, tang, fk.F1)
    dnorm = np.linalg.norm(d, axis=1)
    cosmis = np.abs(np.sum(d * f, axis=1)) / np.maximum(dnorm, 1e-300)
    bad = (ang > eps / 2) | (cosmis < np.cos(MISALIGNED))
    if not bad.any():
        return Corrugation(c, 0.0, 0.0, 0.0, 0.0)
    beta, s, P, _ = profile()
    perp = np.sqrt(np.maximum(np.sum(tang**2, axis=1) - dnorm**2, 0.0))
    speed = np.linalg.norm(tang, axis=1)
    K = K_MARGIN * max(float(np.max(perp[bad])) / (np.tan(eps) * np.cos(beta)), float(np.max(speed[bad])))
    pmax = float(np.max(np.linalg.norm(P, axis=1)))
    omega = K * pmax / (AMPLITUDE_SHARE * eta)
    t = c.params
    span = 1.0 if c.closed else float(t[-1] - t[0])
    for _ in range(12):
        periods = np.ceil(omega * span) if c.closed else omega * span
        if n / max(periods, 1.0) < MIN_SAMPLES_PER_PERIOD:
            raise ResolutionError(
                f"corrugation needs {int(periods)} periods; use at least {int(MIN_SAMPLES_PER_PERIOD * periods) + 1} samples"
            )
        w = periods / span
        sigma = _cutoff(bad, t, c.closed, ramp=max(4.0 / w, 2.0 / n))
        Pv = _periodic_interp(w * (t - t[0]), s, P)
        disp = (sigma * K / w)[:, None] * (Pv[:, :1] * F + Pv[:, 1:] * G)
        out = c.with_points(pts + disp)
        got = tangency_angles(out.points, out.tangents())
        dist = float(np.max(np.linalg.norm(disp, axis=1)))
        if np.max(got) <= eps and dist <= eta:
            return Corrugation(out, float(w), float(K * pmax / w), float(K), float(np.mean(sigma > 0)))
        omega = 1.5 * w
    raise ResolutionError("corrugation did not reach the ε-cone; increase the sample count")
