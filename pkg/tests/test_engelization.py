import numpy as np
import pytest

from conftest import engel_circle
from engel_horizon._corrugation import corrugate
from engel_horizon._numerics import derivative
from engel_horizon.core_geometry import (
    DiscreteCurve,
    FormalEngelKnot,
    curve_angles,
    embeddedness_check,
    kernel_tangency_set,
    scanning,
    sup_distance,
)
from engel_horizon.corpus import corpus_curve
from engel_horizon.engelization import (
    CurveFamily,
    EngelizeConfig,
    engelize,
    engelize_family,
    engelize_with_log,
    repair_tangency_locus,
)
from engel_horizon.errors import (
    BoundaryConditionError,
    BudgetError,
    ConfigurationError,
    GenericityError,
    ResolutionError,
)
from engel_horizon.projections import closure_defects, geiges_project, lagrangian_project
from engel_horizon.surgery import window_indices

CFG = EngelizeConfig(eps=0.2, eta=0.05)


@pytest.fixture(scope="module")
def corpus_runs():
    out = []
    for i in range(4):
        c = corpus_curve(42, i)
        res, rep, log = engelize_with_log(c, CFG)
        out.append((c, res, rep, log))
    return out


@pytest.mark.parametrize(
    "kw",
    [{"eps": 0.0}, {"eps": 2.0}, {"eta": 0.0}, {"N_wrinkles": 1}, {"N_wrinkles": 2.5}, {"A0": -1.0}, {"tol_engel": 0.0}],
)
def test_config_validation(kw):
    with pytest.raises(ConfigurationError):
        EngelizeConfig(**kw)


def test_config_echo_rebuilds():
    cfg = EngelizeConfig(eta=0.07, seed=3)
    assert EngelizeConfig(**cfg.echo()) == cfg


# -- single knots ------------------------------------------------------------------------


def test_corpus_postconditions(corpus_runs):
    for c, out, rep, log in corpus_runs:
        assert rep.max_angle <= 1e-3
        assert max(abs(rep.closure_dz), abs(rep.closure_dy)) <= 1e-8
        assert embeddedness_check(out) > 0
        assert sup_distance(out, c) <= CFG.eta
        assert log.response_error <= 1e-6


def test_relative_and_local(corpus_runs):
    for c, out, _, log in corpus_runs:
        good = curve_angles(c) <= CFG.tol_engel / 10
        width = max(k["width"] for k in log.kinks)
        t = c.params
        changed = np.flatnonzero(np.any(out.points != c.points, axis=1))
        # every changed sample lies within 2·(max kink width) of a non-margin sample
        bad_t = t[~good]
        d = np.abs(t[changed, None] - bad_t[None])
        d = np.minimum(d, 1 - d).min(axis=1)
        assert np.all(d <= 2 * width + 4 * (1 / CFG.N_wrinkles))
        assert changed.size < len(c)


def test_pfaffian_conservation(corpus_runs):
    for _, out, _, _ in corpus_runs:
        d = derivative(out.points, out.params, True)
        scale = CFG.tol_engel * np.max(np.abs(d[:, 0]))
        assert np.max(np.abs(d[:, 2] - out.w * d[:, 0])) <= 10 * scale
        assert np.max(np.abs(d[:, 1] - out.z * d[:, 0])) <= 10 * scale


def test_engel_input_is_returned(corpus_runs):
    _, out, _, _ = corpus_runs[0]
    again, rep, log = engelize_with_log(out, CFG)
    assert again is out and log.empty
    assert rep.max_angle <= CFG.tol_engel


def test_deterministic(corpus_runs):
    c, out, _, log = corpus_runs[1]
    out2, _, log2 = engelize_with_log(c, CFG)
    assert np.array_equal(out.points, out2.points) and log.to_dict() == log2.to_dict()


def test_budget_error_reports_overshoot():
    c = corpus_curve(42, 0)
    with pytest.raises(BudgetError) as e:
        engelize(c, EngelizeConfig(eps=0.2, eta=0.002))
    assert e.value.overshoot > 0


def test_resolution_limit():
    c = corpus_curve(42, 0, n=1024)
    with pytest.raises(ResolutionError):
        engelize(c, EngelizeConfig(eps=0.2, eta=0.05, N_wrinkles=32))


def test_circle_defect_killed():
    c = engel_circle()
    dz, _ = closure_defects(lagrangian_project(geiges_project(c)), float(c.z[0]))
    assert dz == pytest.approx(-np.pi, abs=1e-5)
    out, rep, log = engelize_with_log(c, EngelizeConfig(eps=0.5, eta=0.5, loop_fraction=0.3, A0=10))
    assert max(abs(rep.closure_dz), abs(rep.closure_dy)) <= 1e-8
    assert rep.max_angle <= 1e-3
    assert log.mode == "periodic" and len(log.kinks) == log.N_wrinkles
    assert log.response_error <= 1e-6


# -- tangency repair ------------------------------------------------------------------------


def test_repair_identity_without_tangencies():
    t = np.arange(512) / 512
    tau = 2 * np.pi * t
    c = DiscreteCurve(np.column_stack([np.cos(tau), np.sin(2 * tau) / 2, np.sin(tau), 0.3 * np.sin(tau)]), True, t)
    assert len(kernel_tangency_set(c, CFG.tangency_threshold)) == 0
    assert repair_tangency_locus(c, CFG) is c


def test_repair_two_tangencies():
    t = np.arange(4096) / 4096
    tau = 2 * np.pi * t
    # tangent to the kernel ∂w at t = 0 and t = 1/2
    c = DiscreteCurve(np.column_stack([np.cos(tau), 0 * t, 0.2 * np.cos(2 * tau), np.sin(tau)]), True, t)
    ts = kernel_tangency_set(c, CFG.tangency_threshold)
    assert len(ts) == 2
    out = repair_tangency_locus(c, CFG)
    ang = curve_angles(out)
    for a, b in ts.intervals:
        b = b + 1.0 if b < a else b
        idx = window_indices(c.params, a, b, True)
        assert np.max(ang[idx]) <= CFG.tol_engel
    assert sup_distance(out, c) <= CFG.eta


def test_repair_rejects_kernel_orbit_arc():
    t = np.arange(1024) / 1024
    tau = 2 * np.pi * t
    # the left side x = -1/2 is a straight segment along ∂w
    c = DiscreteCurve(np.column_stack([np.maximum(np.cos(tau), -0.5), 0 * t, 0 * t, np.sin(tau)]), True, t)
    with pytest.raises(GenericityError):
        repair_tangency_locus(c, CFG)


# -- ε-relation ---------------------------------------------------------------------------------


def test_convex_integrate_identity_on_engel():
    from engel_horizon.engelization import convex_integrate

    out = corrugate_input = scanning(engel_curve_open())
    res = convex_integrate(corrugate_input, CFG)
    assert np.max(np.abs(res.points - out.curve.points)) <= 1e-12


def engel_curve_open(n=1024):
    t = np.linspace(0, 1, n)
    return DiscreteCurve(np.column_stack([t, t**3 / 3, t**2, 2 * t]), False, t)


def segment_with_vertical_line(n=4096):
    t = np.linspace(0, 1, n)
    c = DiscreteCurve(np.column_stack([t, 0 * t, 0 * t, 0 * t]), False, t)
    return FormalEngelKnot(c, np.tile([0.0, 1.0], (n, 1)))


def test_convex_integrate_vertical_line_field():
    fk = segment_with_vertical_line()
    a = corrugate(fk, 0.3, 0.05)
    assert np.max(curve_angles(a.curve)) <= 0.3
    assert sup_distance(a.curve, fk.curve) <= 0.05
    b = corrugate(fk, 0.3, 0.025)
    assert sup_distance(b.curve, fk.curve) <= 0.025
    assert b.frequency / a.frequency == pytest.approx(2.0, rel=0.1)


# -- families ----------------------------------------------------------------------------------


def test_family_constant_and_errors(corpus_runs):
    _, out, _, _ = corpus_runs[0]
    fam = CurveFamily((out,) * 5)
    res = engelize_family(fam, CFG)
    assert all(m is out for m in res.members)
    with pytest.raises(ConfigurationError):
        engelize_family(fam, EngelizeConfig(eta=0.05, delta_collar=0.2))
    c = corpus_curve(42, 0)
    with pytest.raises(BoundaryConditionError):
        engelize_family(CurveFamily((c, out, out)), CFG)
