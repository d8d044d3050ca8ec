import numpy as np
import pytest

from engel_horizon._numerics import cumtrapz, wrap_step
from engel_horizon.core_geometry import DiscreteCurve


def curve_on(fn, n, lo=0.0, hi=1.0, closed=False):
    """Sample ``fn(s)`` for s on [lo, hi] (or [lo, hi) when closed) on the uniform grid."""
    t = np.arange(n) / n if closed else np.linspace(0.0, 1.0, n)
    s = lo + (hi - lo) * t
    cols = [np.broadcast_to(np.asarray(c, dtype=float), s.shape) for c in fn(s)]
    return DiscreteCurve(np.column_stack(cols), closed, t)


def engel_circle(n=8192):
    """Closed curve with Lagrangian projection (cos, sin): z gets the -π holonomy back by a linear ramp."""
    t = np.arange(n) / n
    x = np.cos(2 * np.pi * t)
    w = np.sin(2 * np.pi * t)
    z = cumtrapz(w, x) + np.pi * t
    y = cumtrapz(z, x)
    y = y - (y[-1] + wrap_step(z, x)) * t
    return DiscreteCurve(np.column_stack([x, y, z, w]), True, t)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_angle(p, v, m=10_000):
    """Smallest angle between v and a dense grid of unit vectors in D_p, refined locally."""
    from engel_horizon.core_geometry import engel_frame

    X, W = engel_frame(p)
    e1 = X / np.linalg.norm(X)
    v = np.asarray(v, float) / np.linalg.norm(v)

    def ang(th):
        u = np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * W
        return np.arccos(np.clip(np.abs(u @ v), 0, 1))

    th = np.linspace(0, np.pi, m, endpoint=False)
    best = th[np.argmin(ang(th))]
    fine = best + np.linspace(-np.pi / m, np.pi / m, 2001)
    return float(np.min(ang(fine)))


def jet_curve(n, amps, phases, wobble=0.2):
    """Engel curve (x, F(x), f(x), f'(x)) over x(t) = t + wobble·sin(2πt)/(2π), f a sine sum."""
    k = np.arange(1, len(amps) + 1)

    def fn(t):
        x = t + wobble * np.sin(2 * np.pi * t) / (2 * np.pi)
        arg = np.outer(x, k) + phases
        f = np.sin(arg) @ amps
        F = -np.cos(arg) @ (amps / k)
        fp = np.cos(arg) @ (amps * k)
        return x, F, f, fp

    return curve_on(fn, n)


def legendrian_circle(n=4096, orient=1):
    """Planar circle with z the action lift plus the drift that makes z periodic."""
    from engel_horizon.legendrian import LegendrianCurve, action_lift, z_closure_defect

    t = np.arange(n) / n
    tau = 2 * np.pi * t
    xy = np.column_stack([np.cos(tau), orient * np.sin(tau)])
    c = action_lift(xy, closed=True)
    D = z_closure_defect(c)
    return LegendrianCurve(np.column_stack([xy, c.z - D * t]), True, t)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
