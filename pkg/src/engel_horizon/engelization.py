"""Extension algorithm: turn ε-Engel knots (and 1-parameter families) into Engel knots.

Pipeline for one knot
---------------------
1. Validate (closed, embedded, generic, ε-Engel) and return Engel input untouched.
2. Repair the kernel-tangency locus with integrate-and-blend surgery.
3. Mark samples that are Engel with margin (angle ≤ tol_engel/10); they are
   copied bit-identically. Every other run is dilated to a modified region.
4. On each region place wrinkles at t_i = i/N and area controllers (pairs of
   adjacent lobes) at (2i+1)/2N. Each template displaces x by a fixed loop
   r ψ(s) sin(πs) and w by a combination of five bump-windowed shapes.
5. With x fixed, the lifted z = ∫ w dx and y = ∫ z dx are affine in the shape
   coefficients, so matching the region exits (or closing the whole loop) is
   a linear constraint and tracking the input is a linear least-squares
   objective. The damped KKT system gives the coefficients exactly.
6. Verify: Engel within tol_engel, closure, embeddedness, the C⁰ budget and
   y-separation at front self-tangencies. If the budget is exceeded, N is
   doubled (up to 256) before a :class:`BudgetError` is raised.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._corrugation import corrugate
from ._lift_solver import solve_lift
from ._numerics import bump, cumtrapz, smoothstep
from .core_geometry import (
    TOL_ENGEL,
    DefectReport,
    DiscreteCurve,
    FormalEngelKnot,
    curve_angles,
    curve_defect,
    embeddedness_check,
    is_generic_knot,
    kernel_tangency_set,
    runs_of,
    sup_distance,
)
from .errors import (
    BoundaryConditionError,
    BudgetError,
    ConfigurationError,
    ConstraintViolation,
    GenericityError,
    InvalidInputError,
    ResolutionError,
    SurgeryCollisionError,
)
from .projections import Front, closure_defects, geiges_project, lagrangian_project
from .surgery import BlendWindow, make_engel_near, self_tangency_y_separation, signed_offset, window_indices

MAX_WRINKLES = 256
WRINKLE_FILL = 0.9
MIN_TEMPLATE_SAMPLES = 24
LAWSON_ITERS = 12  # samples across the narrowest template half-width


@dataclass(frozen=True)
class EngelizeConfig:
    """Parameters of the extension algorithm.

    ``loop_fraction`` sets the loop x-radius as a fraction of ``eta``;
    ``tangency_threshold`` is the kernel-angle threshold used for genericity
    and tangency repair; ``blend_delta`` is the collar width of the repair
    windows.
    """

    eps: float = 0.2
    eta: float = 0.05
    tol_engel: float = TOL_ENGEL
    N_wrinkles: int = 16
    A0: float = 0.05
    seed: int = 0
    delta_collar: float = 0.1
    loop_fraction: float = 0.2
    tangency_threshold: float = 0.1
    blend_delta: float = 0.01
    max_area_ratio: float = 1.0

    def __post_init__(self):
        if not 0 < self.eps < np.pi / 2:
            raise ConfigurationError("eps must lie in (0, pi/2)")
        if self.eta <= 0:
            raise ConfigurationError("eta must be positive")
        if self.tol_engel <= 0:
            raise ConfigurationError("tol_engel must be positive")
        if int(self.N_wrinkles) != self.N_wrinkles or self.N_wrinkles < 2:
            raise ConfigurationError("N_wrinkles must be an integer >= 2")
        if self.A0 <= 0:
            raise ConfigurationError("A0 must be positive")
        if not 0 < self.delta_collar:
            raise ConfigurationError("delta_collar must be positive")
        if not 0 < self.loop_fraction < 1:
            raise ConfigurationError("loop_fraction must lie in (0, 1)")
        if not 0 < self.tangency_threshold < np.pi / 4:
            raise ConfigurationError("tangency_threshold must lie in (0, pi/4)")
        if self.blend_delta <= 0:
            raise ConfigurationError("blend_delta must be positive")

    def echo(self) -> dict:
        return asdict(self)


@dataclass
class SurgeryLog:
    kinks: list = field(default_factory=list)
    controllers: list = field(default_factory=list)
    repairs: list = field(default_factory=list)
    N_wrinkles: int = 0
    mode: str = "identity"
    response_error: float = 0.0
    closure_before: tuple = (0.0, 0.0)
    closure_after: tuple = (0.0, 0.0)

    @property
    def empty(self) -> bool:
        return not (self.kinks or self.controllers or self.repairs)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "N_wrinkles": self.N_wrinkles,
            "kinks": self.kinks,
            "controllers": self.controllers,
            "repairs": self.repairs,
            "response_error": self.response_error,
            "closure_before": list(self.closure_before),
            "closure_after": list(self.closure_after),
        }


@dataclass(frozen=True, eq=False)
class CurveFamily:
    members: tuple
    boundary_engel: tuple = (True, True)

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) < 2:
            raise InvalidInputError("a family needs at least two members")
        n, closed = len(members[0]), members[0].closed
        if any(len(m) != n or m.closed != closed for m in members):
            raise InvalidInputError("family members must share sample count and closed flag")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "boundary_engel", tuple(bool(b) for b in self.boundary_engel))

    def __len__(self):
        return len(self.members)

    @property
    def k(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.members))

    def continuity_bound(self) -> float:
        return max(sup_distance(a, b) for a, b in zip(self.members[:-1], self.members[1:]))


# ---------------------------------------------------------------------------
# templates


@dataclass(frozen=True)
class _Template:
    kind: str  # "wrinkle" or "controller+" / "controller-"
    center: float
    width: float
    index: int


def template_grid(N: int) -> list:
    """Wrinkles at i/N and controller lobe pairs around (2i+1)/2N, sorted by center."""
    W = WRINKLE_FILL / (4 * N)
    out = []
    for i in range(N):
        out.append(_Template("wrinkle", i / N, W, i))
        c = (2 * i + 1) / (2 * N)
        out.append(_Template("controller+", (c - W / 2) % 1.0, W / 2, i))
        out.append(_Template("controller-", (c + W / 2) % 1.0, W / 2, i))
    return sorted(out, key=lambda tp: tp.center)


def loop_gain() -> float:
    """(x, w)-area of the unit loop ψ cos(πs) dX with X = ψ sin(πs)."""
    s = np.linspace(-1.0, 1.0, 20001)
    X = bump(s) * np.sin(np.pi * s)
    return float(np.sum(0.5 * (bump(s[1:]) * np.cos(np.pi * s[1:]) + bump(s[:-1]) * np.cos(np.pi * s[:-1])) * np.diff(X)))


def _shapes(offset: np.ndarray) -> tuple:
    psi = bump(offset)
    ps = np.pi * offset
    cols = [psi * np.cos(ps), psi, psi * np.sin(ps), psi * np.cos(2 * ps), psi * np.sin(2 * ps)]
    return psi * np.sin(ps), np.column_stack(cols)


SHAPES_PER_TEMPLATE = 5


def _support_masks(t: np.ndarray, templates: list) -> np.ndarray:
    return np.stack([np.abs(signed_offset(t, tp.center, True)) < tp.width for tp in templates])


def _dilate(mask: np.ndarray, k: int) -> np.ndarray:
    out = mask.copy()
    for s in range(1, k + 1):
        out |= np.roll(mask, s) | np.roll(mask, -s)
    return out


@dataclass
class _Region:
    loc: np.ndarray  # local samples, anchors included unless periodic
    templates: list
    periodic: bool


def plan_regions(good: np.ndarray, t: np.ndarray, N: int) -> list:
    """Modified regions of a closed curve and the templates each one carries."""
    n = good.size
    if good.all():
        return []
    templates = template_grid(N)
    supp = _support_masks(t, templates)
    cover = _dilate(~good, int(np.ceil(n / (2 * N))))
    chosen = supp[np.any(supp & cover, axis=1)]
    region = _dilate(cover | np.any(chosen, axis=0), 2)
    if region.all() or (~region).sum() < 2:
        return [_Region(np.arange(n), templates, True)]
    out = []
    for s, k in runs_of(region, True):
        interior = (s + np.arange(k)) % n
        inside = np.zeros(n, dtype=bool)
        inside[interior] = True
        tps = [tp for tp, m in zip(templates, supp) if m.any() and not np.any(m & ~inside)]
        loc = np.concatenate([[(s - 1) % n], interior, [(s + k) % n]])
        out.append(_Region(loc, tps, False))
    return out


def _local_t(t: np.ndarray, loc: np.ndarray) -> np.ndarray:
    return t[loc[0]] + np.concatenate([[0.0], np.cumsum(np.diff(t[loc]) % 1.0)])


def _solve_region(pts: np.ndarray, t: np.ndarray, reg: _Region, radius: float, weights=None) -> tuple:
    from ._lift_solver import _lift_levels

    loc = reg.loc
    x, y, z, w = (pts[loc, i] for i in range(4))
    tl = t[loc]
    X = np.zeros(loc.size)
    cols = []
    for tp in reg.templates:
        xs, B = _shapes(signed_offset(tl, tp.center, True) / tp.width)
        # a loop of x-radius r drags z by about w·r, so shrink it where |w| is large
        on = xs != 0
        r = radius / max(1.0, float(np.max(np.abs(w[on])))) if on.any() else radius
        X += r * xs
        cols.append(B)
    basis = np.hstack(cols) if cols else np.zeros((loc.size, 0))
    xt = x + X
    if reg.periodic:
        seeds = ends = [z[0], y[0]]
    else:
        seeds = [z[0], y[0]]
        ends = [z[-1], y[-1]]
    # Lawson iterations: reweight samples by their deviation to push the
    # least-squares fit towards the smallest sup-distance
    sw = np.ones(loc.size)
    sol, best = None, np.inf
    for _ in range(LAWSON_ITERS):
        trial = solve_lift(xt, w, basis, [z, y], seeds, ends, reg.periodic, w, weights=weights, sample_weights=sw)
        dev = np.sqrt(X**2 + (trial.u - w) ** 2 + (trial.levels[0] - z) ** 2 + (trial.levels[1] - y) ** 2)
        if dev.max() < best:
            sol, best = trial, dev.max()
        sw = sw * (dev + 1e-3 * best)
        sw /= sw.mean()
    _, base_ends = _lift_levels(w, xt, seeds, reg.periodic)
    predicted = sol.response @ sol.coeffs
    measured = sol.closing + np.asarray(ends, dtype=float) - base_ends
    local = np.column_stack([xt, sol.levels[1], sol.levels[0], sol.u])
    return local, sol, float(np.max(np.abs(predicted - measured))), xt


def _template_records(reg: _Region, t, pts_in, local, coeffs) -> tuple:
    tl = t[reg.loc]
    kinks, lobes = [], {}
    for j, tp in enumerate(reg.templates):
        m = np.abs(signed_offset(tl, tp.center, True)) < tp.width
        ii = np.flatnonzero(m)
        ii = np.arange(max(ii[0] - 1, 0), min(ii[-1] + 2, tl.size))
        before = pts_in[reg.loc[ii]]
        after = local[ii]
        area = float(cumtrapz(after[:, 3], after[:, 0])[-1] - cumtrapz(before[:, 3], before[:, 0])[-1])
        c = coeffs[SHAPES_PER_TEMPLATE * j: SHAPES_PER_TEMPLATE * (j + 1)]
        rec = {"center": float(tp.center), "width": float(tp.width), "height": float(c[0]), "area": area}
        if tp.kind == "wrinkle":
            kinks.append(rec)
        else:
            lobes.setdefault(tp.index, {})[tp.kind[-1]] = rec
    return kinks, lobes


# ---------------------------------------------------------------------------
# tangency repair


def repair_tangency_locus(c: DiscreteCurve, cfg: EngelizeConfig, log: Optional[SurgeryLog] = None) -> DiscreteCurve:
    """Integrate-and-blend on a neighbourhood of every kernel-tangency interval."""
    if not c.closed:
        raise InvalidInputError("tangency repair works on closed curves")
    if not is_generic_knot(c, cfg.tangency_threshold):
        raise GenericityError("curve is everywhere tangent to the kernel line field")
    ts = kernel_tangency_set(c, cfg.tangency_threshold)
    out = c
    pad = max(cfg.blend_delta, 4.0 / len(c))
    for a, b in ts.intervals:
        if b < a:
            b += 1.0
        a, b = a - pad, b + pad
        lo, hi = a - cfg.blend_delta, b + cfg.blend_delta
        idx = window_indices(out.params, lo, hi, True)
        if np.max(curve_angles(out)[idx]) <= cfg.tol_engel / 10:
            continue
        out = make_engel_near(out, BlendWindow(a, b, cfg.blend_delta))
        if log is not None:
            log.repairs.append({"a": float(a), "b": float(b), "delta": float(cfg.blend_delta)})
    return out


# ---------------------------------------------------------------------------
# single knots


def _validate(c: DiscreteCurve, cfg: EngelizeConfig) -> np.ndarray:
    if not c.closed:
        raise InvalidInputError("engelize needs a closed curve")
    angles = curve_angles(c)
    if np.max(angles) > cfg.eps:
        raise ConstraintViolation(f"input is not {cfg.eps:.3g}-Engel (max angle {np.max(angles):.3g})")
    if embeddedness_check(c) <= 0:
        raise InvalidInputError("input curve is not embedded")
    return angles


def _extend(c: DiscreteCurve, cfg: EngelizeConfig, N: int, keep: Optional[np.ndarray] = None, radius=None) -> tuple:
    # ``keep`` marks samples that must stay bit-identical (default: angle <= tol_engel/10)
    """One pass of the extension with N wrinkles; returns (curve, log)."""
    log = SurgeryLog(N_wrinkles=N)
    n = len(c)
    W = WRINKLE_FILL / (4 * N)
    if 0.5 * W * n < MIN_TEMPLATE_SAMPLES:
        raise ResolutionError(f"{n} samples cannot resolve {N} wrinkles; use at least {int(np.ceil(2 * MIN_TEMPLATE_SAMPLES / W))} samples")
    radius = cfg.loop_fraction * cfg.eta if radius is None else radius
    good = curve_angles(c) <= cfg.tol_engel / 10 if keep is None else keep
    regions = plan_regions(good, c.params, N)
    pts = np.array(c.points)
    t = c.params
    err = 0.0
    for reg in regions:
        local, sol, e, _ = _solve_region(c.points, t, reg, radius)
        err = max(err, e)
        kinks, lobes = _template_records(reg, t, c.points, local, sol.coeffs)
        log.kinks.extend(kinks)
        for i in sorted(lobes):
            pair = lobes[i]
            if "+" in pair and "-" in pair:
                at = (2 * i + 1) / (2 * N)
                log.controllers.append({"at": at, "A0": cfg.A0, "plus": pair["+"], "minus": pair["-"]})
        write = slice(None) if reg.periodic else slice(1, -1)
        pts[reg.loc[write]] = local[write]
    log.mode = "periodic" if any(r.periodic for r in regions) else "relative"
    log.response_error = err
    return c.with_points(pts), log


def _over_capacity(log: SurgeryLog, cfg: EngelizeConfig) -> bool:
    cap = cfg.max_area_ratio * cfg.A0
    return any(abs(c[s]["area"]) > cap for c in log.controllers for s in ("plus", "minus"))


def _verify(out: DiscreteCurve, c: DiscreteCurve, cfg: EngelizeConfig) -> DefectReport:
    rep = curve_defect(out, c)
    if rep.max_angle > cfg.tol_engel:
        raise ResolutionError(f"output angle {rep.max_angle:.3g} exceeds tol_engel; increase the sample count")
    if rep.min_separation <= 0:
        raise SurgeryCollisionError("surgery produced a self-intersection")
    front = Front(out.points[:, [0, 2]], True, out.params, slope=out.w)
    if not self_tangency_y_separation(front, out.y):
        raise SurgeryCollisionError("front self-tangency without y-separation")
    return rep


def engelize_with_log(c: DiscreteCurve, cfg: EngelizeConfig) -> tuple:
    """Like :func:`engelize` but also returns the :class:`SurgeryLog`."""
    angles = _validate(c, cfg)
    if np.max(angles) <= cfg.tol_engel:
        return c, curve_defect(c, c), SurgeryLog()
    if not is_generic_knot(c, cfg.tangency_threshold):
        raise GenericityError("curve is everywhere tangent to the kernel line field")
    before = closure_defects(lagrangian_project(geiges_project(c)), float(c.z[0]))
    log0 = SurgeryLog()
    repaired = repair_tangency_locus(c, cfg, log0)
    # collar samples of a repair are not lifts, so they never count as kept
    keep = (angles <= cfg.tol_engel / 10) & np.all(repaired.points == c.points, axis=1)
    N = int(cfg.N_wrinkles)
    last = None
    while N <= MAX_WRINKLES:
        try:
            out, log = _extend(repaired, cfg, N, keep)
        except ResolutionError:
            if last is None:
                raise
            break
        dist = sup_distance(out, c)
        if dist <= cfg.eta and not _over_capacity(log, cfg):
            rep = _verify(out, c, cfg)
            log.repairs = log0.repairs
            log.closure_before = before
            log.closure_after = (rep.closure_dz, rep.closure_dy)
            return out, rep, log
        last = dist
        N *= 2
    raise BudgetError(f"C0 distance {last:.4g} exceeds eta={cfg.eta:.4g}", overshoot=last - cfg.eta)


def engelize(c: DiscreteCurve, cfg: EngelizeConfig) -> tuple:
    """Engel knot C⁰-close to the ε-Engel knot ``c``; returns (curve, DefectReport)."""
    out, rep, _ = engelize_with_log(c, cfg)
    return out, rep


# ---------------------------------------------------------------------------
# ε-relation


def convex_integrate(fk: FormalEngelKnot, cfg: EngelizeConfig) -> DiscreteCurve:
    """ε-Engel curve within ``cfg.eta`` of ``fk.curve`` whose corrugations follow F₁.

    Samples where the tangent is already in the ε/2-cone and agrees with the
    formal line F₁ are left bit-identical.
    """
    return corrugate(fk, cfg.eps, cfg.eta).curve


# ---------------------------------------------------------------------------
# families


def collar_schedule(k: float, delta: float) -> tuple:
    """(loop amplitude, slope enlargement) factors at family parameter ``k``.

    Loops are inserted at zero size on the outer collar, opened to full size
    across the second collar, and slope enlargement switches on across the
    third one.
    """
    d = min(k, 1.0 - k)
    insert = float(smoothstep(d / delta))
    opened = float(smoothstep((d - delta) / delta))
    enlarge = float(smoothstep((d - 2 * delta) / delta))
    return 0.3 * insert + 0.7 * opened, enlarge


def _family_member(c: DiscreteCurve, cfg: EngelizeConfig, N: int, amp: float, enlarge: float) -> tuple:
    n = len(c)
    W = WRINKLE_FILL / (4 * N)
    if 0.5 * W * n < MIN_TEMPLATE_SAMPLES:
        raise ResolutionError(f"{n} samples cannot resolve {N} wrinkles")
    reg = _Region(np.arange(n), template_grid(N), True)
    # before enlargement the slope is tracked more tightly
    weights = (1.0 + 4.0 * (1.0 - enlarge), 1.0, 1.0)
    local, sol, err, _ = _solve_region(c.points, c.params, reg, amp * cfg.loop_fraction * cfg.eta, weights)
    return c.with_points(local), err


def engelize_family(fam: CurveFamily, cfg: EngelizeConfig) -> CurveFamily:
    """Engelize every member of a family whose two ends are Engel knots."""
    if 3 * cfg.delta_collar > 0.5:
        raise ConfigurationError("collars overlap: need 3*delta_collar <= 1/2")
    members = fam.members
    for end, flag in ((0, fam.boundary_engel[0]), (-1, fam.boundary_engel[1])):
        if flag and np.max(curve_angles(members[end])) > cfg.tol_engel:
            raise BoundaryConditionError("boundary member is not Engel within tol_engel")
    ks = fam.k
    interior = [i for i in range(len(members)) if 0 < i < len(members) - 1 or not fam.boundary_engel[0 if i == 0 else 1]]
    for i in interior:
        _validate(members[i], cfg)
    N = int(cfg.N_wrinkles)
    while True:
        out = list(members)
        worst = 0.0
        for i in interior:
            c = members[i]
            if np.max(curve_angles(c)) <= cfg.tol_engel:
                continue
            amp, enl = collar_schedule(float(ks[i]), cfg.delta_collar)
            out[i], _ = _family_member(c, cfg, N, amp, enl)
            worst = max(worst, sup_distance(out[i], c))
        if worst <= cfg.eta:
            break
        if 2 * N > MAX_WRINKLES:
            raise BudgetError(f"C0 distance {worst:.4g} exceeds eta={cfg.eta:.4g}", overshoot=worst - cfg.eta)
        N *= 2
    for i in interior:
        if out[i] is not members[i]:
            _verify(out[i], members[i], cfg)
    return CurveFamily(tuple(out), fam.boundary_engel)
