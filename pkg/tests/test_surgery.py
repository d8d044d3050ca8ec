import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import curve_on
from engel_horizon._numerics import bump, cumtrapz
from engel_horizon.core_geometry import curve_angles, sup_distance
from engel_horizon.errors import (
    CapacityError,
    ConstraintViolation,
    InvalidWindowError,
    KinkLookupError,
    PlacementError,
)
from engel_horizon.projections import Front, LagrangianPlaneCurve, front_lift, lagrangian_lift
from engel_horizon.surgery import (
    BlendWindow,
    KinkSpec,
    enlarge_wrinkle,
    insert_area_controller,
    insert_kink,
    make_engel_near,
    self_tangency_y_separation,
    tune_area_controllers,
    window_indices,
)


def wavy(amp=0.01, freq=50.0, n=4096):
    """x-axis with z perturbed by amp·sin(freq t) on a bump around t = 1/2."""
    return curve_on(lambda t: (t, 0 * t, amp * np.sin(freq * t) * bump((t - 0.5) / 0.2), 0 * t), n)


def straight_front(n=2048, slope=0.2):
    t = np.linspace(0, 1, n)
    return Front(np.column_stack([t, slope * t]), slope=np.full(n, slope))


def area(f):
    return float(cumtrapz(f.z, f.x)[-1])


def inner(window):
    quarter = 0.25 * (window.b - window.a)
    return window.a + quarter, window.b - quarter


# -- integrate and blend ---------------------------------------------------------


def test_make_engel_near_identity_on_engel_input():
    t = np.linspace(0, 1, 2048)
    c = lagrangian_lift(LagrangianPlaneCurve(np.column_stack([t, np.sin(5 * t)])), 0.1, 0.2)
    out = make_engel_near(c, BlendWindow(0.3, 0.7, 0.05))
    assert np.max(np.abs(out.points - c.points)) <= 1e-12


def test_make_engel_near_wavy_window():
    c = wavy()
    w = BlendWindow(0.3, 0.7, 0.1)
    out = make_engel_near(c, w)
    lo, hi = inner(w)
    idx = window_indices(c.params, lo, hi, False)
    assert np.max(curve_angles(out)[idx]) <= 1e-3
    outside = (c.params < 0.2) | (c.params > 0.8)
    assert np.array_equal(out.points[outside], c.points[outside])


def test_make_engel_near_shrinking_windows():
    c = curve_on(lambda t: (t, 0 * t, 0.05 * np.sin(3 * t), 0 * t), 4096)
    assert np.max(curve_angles(c)) <= 0.2
    dists = []
    for L in (0.2, 0.1, 0.05):
        w = BlendWindow(0.5 - L / 4, 0.5 + L / 4, L / 4)
        dists.append(sup_distance(make_engel_near(c, w), c))
    assert dists[0] > dists[1] > dists[2]


def test_make_engel_near_idempotent():
    c = wavy()
    w = BlendWindow(0.3, 0.7, 0.1)
    once = make_engel_near(c, w)
    twice = make_engel_near(once, w)
    lo, hi = inner(w)
    idx = window_indices(c.params, lo, hi, False)
    assert np.max(np.abs(twice.points[idx] - once.points[idx])) <= 1e-12


def test_make_engel_near_errors():
    c = wavy()
    with pytest.raises(InvalidWindowError):
        make_engel_near(c, BlendWindow(0.02, 0.5, 0.05))
    with pytest.raises(InvalidWindowError):
        BlendWindow(0.5, 0.4, 0.05)
    steep = curve_on(lambda t: (t, 0 * t, 0.05 * np.sin(80 * t), 0 * t), 4096)
    with pytest.raises(ConstraintViolation):
        make_engel_near(steep, BlendWindow(0.3, 0.7, 0.1), eps=0.2)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 0.6), st.floats(0.05, 0.2), st.floats(0.02, 0.08))
def test_make_engel_near_is_local(a, length, delta):
    c = wavy()
    w = BlendWindow(a, a + length, delta)
    out = make_engel_near(c, w)
    lo, hi = w.support
    outside = (c.params < lo) | (c.params > hi)
    assert np.array_equal(out.points[outside], c.points[outside])


# -- kinks ---------------------------------------------------------------------------


def test_insert_kink_area():
    f = straight_front()
    g = insert_kink(f, KinkSpec(0.5, 0.05, 0.0, 0.01))
    assert area(g) - area(f) == pytest.approx(0.01, abs=1e-8)
    h = insert_kink(f, KinkSpec(0.5, 0.05, 0.0, 0.0))
    assert area(h) - area(f) == pytest.approx(0.0, abs=1e-9)


def test_insert_kink_width_scaling():
    f = straight_front(4096)
    disp = []
    for width in (0.08, 0.04):
        g = insert_kink(f, KinkSpec(0.5, width, 0.0, 0.01))
        disp.append(float(np.max(np.abs(g.z - f.z))))
    # the same area on half the width needs about twice the height
    assert 1.0 <= disp[1] / disp[0] <= 4.0


def test_insert_kink_errors():
    f = insert_kink(straight_front(), KinkSpec(0.5, 0.05, 0.0, 0.01))
    with pytest.raises(PlacementError):
        insert_kink(f, KinkSpec(0.52, 0.05, 0.0, 0.01))
    with pytest.raises(PlacementError):
        insert_kink(f, KinkSpec(0.01, 0.05, 0.0, 0.01))


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(-0.01, 0.01), min_size=1, max_size=4))
def test_kink_area_additivity(areas):
    f0 = f = straight_front()
    centres = np.linspace(0.2, 0.8, len(areas))
    for c, A in zip(centres, areas):
        f = insert_kink(f, KinkSpec(float(c), 0.04, 0.0, A))
    assert area(f) - area(f0) == pytest.approx(sum(areas), abs=len(areas) * 1e-8)
    # outside the supports nothing moved
    far = np.min(np.abs(f.params[:, None] - centres[None]), axis=1) > 0.041
    assert np.array_equal(f.points[far], f0.points[far])


def test_enlarge_wrinkle():
    k = KinkSpec(0.5, 0.05, 0.0, 0.0)
    f = insert_kink(straight_front(), k)
    same = enlarge_wrinkle(f, k, 0.0)
    assert np.max(np.abs(same.points - f.points)) <= 1e-12
    big = enlarge_wrinkle(f, k, 5.0)
    idx = np.abs(big.params - 0.5) < 0.05
    assert np.max(np.abs(big.slopes()[idx])) >= 5.0
    with pytest.raises(KinkLookupError):
        enlarge_wrinkle(f, KinkSpec(0.3, 0.05), 1.0)


def test_enlarge_wrinkle_leaves_other_kinks():
    a, b = KinkSpec(0.3, 0.05, 0.0, 0.0), KinkSpec(0.7, 0.05, 0.0, 0.0)
    f = insert_kink(insert_kink(straight_front(), a), b)
    g = enlarge_wrinkle(f, b, 4.0)
    near_a = np.abs(f.params - 0.3) <= 0.06
    assert np.array_equal(g.points[near_a], f.points[near_a])


# -- area controllers -------------------------------------------------------------------


def test_controller_neutral_and_tuned():
    f = straight_front()
    g, ctl = insert_area_controller(f, 0.5, 0.02, 0.1)
    assert area(g) - area(f) == pytest.approx(0.0, abs=1e-8)
    h, _ = tune_area_controllers(g, [ctl], [0.007])
    assert area(h) - area(f) == pytest.approx(0.007, abs=1e-8)


def test_controller_grid_is_disjoint():
    f = straight_front(4096)
    N = 8
    ctls = []
    for i in range(N):
        f, c = insert_area_controller(f, (2 * i + 1) / (2 * N), 0.01, 0.05)
        ctls.append(c)
    loops = sorted((k.spec.center - k.spec.width, k.spec.center + k.spec.width) for k in f.kinks)
    assert len(loops) == 16
    assert all(a[1] <= b[0] + 1e-15 for a, b in zip(loops[:-1], loops[1:]))


def test_tune_controllers():
    f = straight_front(4096)
    f, c1 = insert_area_controller(f, 0.3, 0.02, 0.1)
    f, c2 = insert_area_controller(f, 0.7, 0.02, 0.1)
    same, _ = tune_area_controllers(f, [c1, c2], [0.0, 0.0])
    assert np.max(np.abs(same.points - f.points)) <= 1e-12
    one, _ = tune_area_controllers(f, [c1, c2], [0.005, 0.0])
    assert area(one) - area(f) == pytest.approx(0.005, abs=1e-7)
    d = 0.004
    both, _ = tune_area_controllers(f, [c1, c2], [d, -d])
    assert area(both) - area(f) == pytest.approx(0.0, abs=1e-8)
    cum = cumtrapz(both.z, both.x) - cumtrapz(f.z, f.x)
    mid = np.argmin(np.abs(f.params - 0.5))
    assert cum[mid] == pytest.approx(d, abs=1e-8)
    with pytest.raises(CapacityError) as e:
        tune_area_controllers(f, [c1, c2], [0.0, 0.05])
    assert e.value.controller == 1


# -- self-tangencies -------------------------------------------------------------------------


def retraced_front(n=2001):
    """Front out along z = 0, over a lopsided bump near the turn, and back along z = 0."""
    t = np.linspace(0, 1, n)
    x = np.sin(np.pi * t)
    z = 0.1 * bump((t - 0.53) / 0.1)
    return Front(np.column_stack([x, z]), slope=np.zeros(n))


def test_y_separation_examples():
    t = np.linspace(0, 1, 512)
    f = Front(np.column_stack([t, np.sin(3 * t)]))
    assert self_tangency_y_separation(f, front_lift(f).y)
    r = retraced_front()
    assert not self_tangency_y_separation(r, np.zeros(len(r)))
    # the lifted y differs between the strands by the loop's ∫ z dx
    gap = cumtrapz(r.z, r.x)[-1]
    assert abs(gap) > 1e-6
    assert self_tangency_y_separation(r, front_lift(r).y)
