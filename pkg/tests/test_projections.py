import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import curve_on, jet_curve
from engel_horizon._numerics import derivative, wrap_step
from engel_horizon.core_geometry import sup_distance
from engel_horizon.errors import CuspError, InvalidInputError
from engel_horizon.projections import (
    Front,
    LagrangianPlaneCurve,
    closure_defects,
    front_lift,
    front_project,
    geiges_project,
    lagrangian_lift,
    lagrangian_project,
)


def round_trip_errors(c):
    g = geiges_project(c)
    t0 = float(c.params[0])
    a = front_lift(front_project(g), y0=float(c.y[0]), t0=t0)
    b = lagrangian_lift(lagrangian_project(g), z0=float(c.z[0]), y0=float(c.y[0]), t0=t0)
    return sup_distance(a, c), sup_distance(b, c)


def test_projection_examples():
    c = curve_on(lambda t: (t, t**3 / 3, t**2, 2 * t), 64)
    g = geiges_project(c)
    assert np.array_equal(g.points, c.points[:, [0, 2, 3]])
    assert np.array_equal(front_project(g).points, np.column_stack([c.x, c.z]))
    assert np.array_equal(lagrangian_project(g).points, np.column_stack([c.x, c.w]))
    v = geiges_project(curve_on(lambda t: (0 * t, 0 * t, 0 * t, t), 32))
    assert np.array_equal(v.points[:, :2], np.zeros((32, 2)))
    loop = curve_on(lambda t: (np.cos(t), 0 * t, np.sin(t), 0 * t), 64, 0, 2 * np.pi, closed=True)
    gl = geiges_project(loop)
    assert gl.closed and len(gl) == 64
    fr = front_project(gl)
    assert np.allclose(np.hypot(fr.x, fr.z), 1.0)
    lag = lagrangian_project(gl)
    assert np.all(lag.w == 0) and np.ptp(lag.x) == pytest.approx(2.0)


def test_constant_z_front_is_horizontal():
    c = curve_on(lambda t: (t, 0.7 * t, 0.7 + 0 * t, 0 * t), 32)
    assert np.all(front_project(geiges_project(c)).z == 0.7)


def test_front_lift_examples():
    n = 4097
    t = np.linspace(0, 1, n)
    c = front_lift(Front(np.column_stack([t, t**2])), y0=0.0)
    assert np.max(np.abs(c.y - t**3 / 3)) <= 1e-7
    assert np.max(np.abs(c.w - 2 * t)) <= 1e-12
    c = front_lift(Front(np.column_stack([t, np.full(n, 0.4)])))
    assert np.allclose(c.points, np.column_stack([t, 0.4 * t, np.full(n, 0.4), np.zeros(n)]), atol=1e-12)
    s = np.pi * t
    c = front_lift(Front(np.column_stack([s, np.sin(s)]), params=t), y0=0.0)
    assert np.max(np.abs(c.w - np.cos(s))) <= 1e-5
    assert np.max(np.abs(c.y - (1 - np.cos(s)))) <= 1e-6


def test_front_lift_rejects_cusps():
    t = np.linspace(0, 1, 65)  # t = 1/2, where x' = 0, is a sample
    with pytest.raises(CuspError):
        front_lift(Front(np.column_stack([(t - 0.5) ** 2, t])))


def test_lagrangian_lift_examples():
    t = np.linspace(0, 1, 257)
    c = lagrangian_lift(LagrangianPlaneCurve(np.column_stack([t, np.zeros_like(t)])), z0=0.5, y0=-1.0)
    assert np.allclose(c.z, 0.5) and np.allclose(c.y, -1.0 + 0.5 * t, atol=1e-14)
    c = lagrangian_lift(LagrangianPlaneCurve(np.column_stack([t, np.ones_like(t)])), z0=0.5, y0=-1.0)
    assert np.allclose(c.z, 0.5 + t, atol=1e-14)
    assert np.allclose(c.y, -1.0 + 0.5 * t + t**2 / 2, atol=1e-14)
    s = np.linspace(0, 2 * np.pi, 4096)
    c = lagrangian_lift(LagrangianPlaneCurve(np.column_stack([np.cos(s), np.sin(s)])))
    assert c.z[-1] == pytest.approx(-np.pi, abs=1e-4)


def test_closure_defect_examples():
    s = 2 * np.pi * np.arange(4096) / 4096
    dz, _ = closure_defects(LagrangianPlaneCurve(np.column_stack([np.cos(s), np.sin(s)]), closed=True))
    # trapezoidal ∮ w dx is the signed area of the inscribed polygon
    assert dz == pytest.approx(-2048 * np.sin(2 * np.pi / 4096), abs=1e-12)
    assert dz == pytest.approx(-np.pi, abs=2e-6)
    dz, _ = closure_defects(LagrangianPlaneCurve(np.column_stack([np.cos(s), np.sin(2 * s)]), closed=True))
    assert dz == pytest.approx(0.0, abs=1e-12)
    # a path retraced back along itself
    t = np.arange(512) / 512
    x = 1 - np.abs(2 * t - 1)
    dz, dy = closure_defects(LagrangianPlaneCurve(np.column_stack([x, np.sin(3 * x)]), closed=True))
    assert dz == pytest.approx(0.0, abs=1e-14) and dy == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(InvalidInputError):
        closure_defects(LagrangianPlaneCurve(np.column_stack([t, t])))


def test_closure_gap_matches_defects():
    s = 2 * np.pi * np.arange(2048) / 2048
    for w in (np.sin(s), np.sin(2 * s), np.sin(2 * s) + 0.3 * np.cos(s) ** 3):
        l = LagrangianPlaneCurve(np.column_stack([np.cos(s), w]), closed=True)
        c = lagrangian_lift(l, z0=0.2)
        # independently integrate once more around the closing segment
        gap_z = c.z[-1] + wrap_step(w, c.x) - c.z[0]
        z_end = c.z[-1] + wrap_step(w, c.x)
        gap_y = c.y[-1] + 0.5 * (c.z[-1] + z_end) * (c.x[0] - c.x[-1]) - c.y[0]
        dz, dy = closure_defects(l, 0.2)
        assert gap_z == pytest.approx(dz, abs=1e-13) and gap_y == pytest.approx(dy, abs=1e-13)
        closes = max(abs(gap_z), abs(gap_y)) <= 1e-8
        assert closes == (max(abs(dz), abs(dy)) <= 1e-8)


def test_front_lift_pfaffian_residuals():
    for n in (1024, 2048):
        t = np.linspace(0, 1, n)
        f = Front(np.column_stack([t + 0.1 * np.sin(3 * t), np.sin(4 * t)]))
        c = front_lift(f)
        d = derivative(c.points, c.params, False)
        assert np.max(np.abs(d[:, 2] - c.w * d[:, 0])) <= 1e-12
        assert np.max(np.abs(d[:, 1] - c.z * d[:, 0])) <= 20.0 / n**2


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    st.lists(st.floats(0, 2 * np.pi), min_size=3, max_size=3),
)
def test_round_trips(amps, phases):
    c = jet_curve(2048, np.array(amps), np.array(phases))
    ef, el = round_trip_errors(c)
    assert ef <= 1e-5 and el <= 1e-5


def test_round_trip_convergence():
    amps, ph = np.array([0.8, -0.5, 0.3]), np.array([0.1, 1.0, 2.0])
    e1 = round_trip_errors(jet_curve(1024, amps, ph))
    e2 = round_trip_errors(jet_curve(2048, amps, ph))
    assert e1[0] / e2[0] >= 3 and e1[1] / e2[1] >= 3
