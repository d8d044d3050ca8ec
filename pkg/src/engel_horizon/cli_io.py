"""Command-line surface: file conversion, corpus generation, reports and plots.

Exit codes: 0 success, 1 constraint or budget violation (the report is still
written), 2 malformed input, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import corpus as _corpus
from .core_geometry import TOL_ENGEL, DiscreteCurve, curve_defect, is_epsilon_engel
from .engelization import CurveFamily, EngelizeConfig, engelize_family, engelize_with_log
from .errors import ConfigurationError, ConstraintViolation, InvalidInputError, MalformedInput
from .fileformat import CurveFile, read_curve, write_curve, write_report
from .legendrian import LegendrianCurve, contact_angles, legendrian_defect, legendrize, z_closure_defect
from .projections import Front, LagrangianPlaneCurve, front_lift, geiges_project, lagrangian_lift
from .svg import PROJECTIONS, plot

EXIT_OK, EXIT_VIOLATION, EXIT_MALFORMED, EXIT_CONFIG = 0, 1, 2, 3
THREADS_ENV = "ENGEL_HORIZON_THREADS"
TIMING_ENV = "ENGEL_HORIZON_TIMING"


@dataclass
class RunReport:
    """Everything needed to re-run a command bit-identically.

    Wall-clock timing is recorded only when ``ENGEL_HORIZON_TIMING=1``, so
    reports stay byte-identical between runs by default.
    """

    command: str
    config: dict
    seed: int = 0
    before: Optional[dict] = None
    after: Optional[dict] = None
    log: dict = field(default_factory=dict)
    status: str = "ok"
    error: Optional[str] = None
    timing: Optional[float] = None

    def to_dict(self) -> dict:
        d = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "before": self.before,
            "after": self.after,
            "log": self.log,
            "status": self.status,
            "error": self.error,
        }
        if self.timing is not None:
            d["timing_s"] = self.timing
        return d


def threads() -> int:
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        k = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if k < 0:
        raise ConfigurationError(f"{THREADS_ENV} must be >= 0")
    return k or (os.cpu_count() or 1)


def parallel_map(fn, items) -> list:
    """Map in input order; results never depend on the thread count."""
    items = list(items)
    k = min(threads(), max(len(items), 1))
    if k <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))


def gen_corpus(count: int, seed: int, eps: float, out_dir, n: int = _corpus.DEFAULT_SAMPLES) -> list:
    """Write ``count`` seeded ε-Engel corpus curves into ``out_dir``; returns the paths."""
    if count < 1:
        raise ConfigurationError("count must be at least 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(i):
        c = _corpus.corpus_curve(seed, i, eps, n)
        path = out / f"curve_{i:04d}.json"
        meta = {"seed": seed, "index": i, "eps": repr(eps), "generator": "corpus"}
        write_curve(CurveFile.of(c, metadata=meta), path)
        return path

    return parallel_map(one, range(count))


def _defect_summary(curve, reference=None) -> dict:
    if isinstance(curve, DiscreteCurve):
        return curve_defect(curve, reference).summary()
    _, dmax = legendrian_defect(curve)
    d = {"max_angle": float(np.max(contact_angles(curve))), "legendrian_defect": dmax}
    if curve.closed:
        d["closure_dz"] = z_closure_defect(curve)
    if reference is not None:
        d["c0_distance"] = float(np.max(np.linalg.norm(curve.points - reference.points, axis=1)))
    return d


def _timed(report: RunReport, start: float) -> None:
    if os.environ.get(TIMING_ENV) == "1":
        report.timing = time.perf_counter() - start


def _kink_metadata(log: dict) -> dict:
    supports = [[k["center"], k["width"]] for k in log.get("kinks", [])]
    return {"kinks": json.dumps(supports)} if supports else {}


# ---------------------------------------------------------------------------
# commands


def _engel_curve(path) -> DiscreteCurve:
    cf = read_curve(path)
    if cf.space != "engel-r4":
        raise InvalidInputError(f"{path}: expected an engel-r4 curve, got {cf.space}")
    return cf.curve()


def cmd_check(args) -> int:
    cf = read_curve(args.input)
    c = cf.curve()
    eps = TOL_ENGEL if args.eps is None else args.eps
    summary = _defect_summary(c)
    if isinstance(c, DiscreteCurve):
        ok = is_epsilon_engel(c, eps) and summary["min_separation"] > 0
    else:
        ok = summary["max_angle"] <= eps
    report = RunReport("check", {"eps": eps}, before=summary, status="ok" if ok else "violation")
    if args.report:
        write_report(report.to_dict(), args.report)
    print(f"{'member' if ok else 'not a member'}: max angle {summary['max_angle']:.3e} (eps {eps:g})")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_project(args) -> int:
    c = _engel_curve(args.input)
    g = geiges_project(c)
    # every projection is stored in the contact chart as (x, w, z), so dz - w dx is the contact form
    pts = np.column_stack([g.points[:, 0], g.points[:, 2], g.points[:, 1]])
    out = LegendrianCurve(pts, c.closed, c.params)
    write_curve(CurveFile.of(out, metadata={"projection": args.to}), args.output)
    return EXIT_OK


def cmd_lift(args) -> int:
    cf = read_curve(args.input)
    if cf.space != "legendrian-r3":
        raise InvalidInputError("lift reads a projected (legendrian-r3) curve")
    p = cf.samples
    closed = cf.closed
    if args.from_ == "front":
        f = Front(p[:, [0, 2]], closed)
        lifted = front_lift(f, y0=args.y0, t0=args.t0)
    else:
        lp = LagrangianPlaneCurve(p[:, :2], closed)
        lifted = lagrangian_lift(lp, z0=args.z0, y0=args.y0, t0=args.t0)
    write_curve(CurveFile.of(lifted), args.output)
    return EXIT_OK


def _config(args, **extra) -> EngelizeConfig:
    kw = {"eta": args.eta, "seed": args.seed}
    if args.eps is not None:
        kw["eps"] = args.eps
    if args.tol is not None:
        kw["tol_engel"] = args.tol
    if args.wrinkles is not None:
        kw["N_wrinkles"] = args.wrinkles
    kw.update(extra)
    return EngelizeConfig(**kw)


def _finish(report: RunReport, path, start: float) -> None:
    _timed(report, start)
    if path:
        write_report(report.to_dict(), path)


def cmd_engelize(args) -> int:
    start = time.perf_counter()
    cfg = _config(args)
    c = _engel_curve(args.input)
    report = RunReport("engelize", cfg.echo(), cfg.seed, before=_defect_summary(c))
    try:
        out, rep, log = engelize_with_log(c, cfg)
    except ConstraintViolation as e:
        report.status, report.error = "violation", f"{type(e).__name__}: {e}"
        _finish(report, args.report, start)
        print(report.error, file=sys.stderr)
        return EXIT_VIOLATION
    report.after = rep.summary()
    report.log = log.to_dict()
    write_curve(CurveFile.of(out, metadata=_kink_metadata(report.log)), args.output)
    _finish(report, args.report, start)
    return EXIT_OK


def cmd_engelize_family(args) -> int:
    start = time.perf_counter()
    cfg = _config(args, delta_collar=args.collar) if args.collar is not None else _config(args)
    paths = sorted(Path(args.input).glob("*.json"))
    if len(paths) < 2:
        raise InvalidInputError(f"{args.input}: a family needs at least two curve files")
    members = parallel_map(_engel_curve, paths)
    fam = CurveFamily(tuple(members))
    report = RunReport("engelize-family", cfg.echo(), cfg.seed, before={"continuity": fam.continuity_bound()})
    try:
        res = engelize_family(fam, cfg)
    except ConstraintViolation as e:
        report.status, report.error = "violation", f"{type(e).__name__}: {e}"
        _finish(report, args.report, start)
        print(report.error, file=sys.stderr)
        return EXIT_VIOLATION
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for p, m in zip(paths, res.members):
        write_curve(CurveFile.of(m), out / p.name)
    report.after = {"continuity": res.continuity_bound(), "max_angle": max(_defect_summary(m)["max_angle"] for m in res.members)}
    _finish(report, args.report, start)
    return EXIT_OK


def cmd_legendrize(args) -> int:
    start = time.perf_counter()
    cf = read_curve(args.input)
    if cf.space != "legendrian-r3":
        raise InvalidInputError("legendrize reads a legendrian-r3 curve")
    c = cf.curve()
    eps = 0.5 if args.eps is None else args.eps
    if not 0 < eps < np.pi / 2 or args.eta <= 0:
        raise ConfigurationError("need 0 < eps < pi/2 and eta > 0")
    report = RunReport("legendrize", {"eps": eps, "eta": args.eta}, before=_defect_summary(c))
    try:
        out, rec = legendrize(c, eps, args.eta)
    except ConstraintViolation as e:
        report.status, report.error = "violation", f"{type(e).__name__}: {e}"
        _finish(report, args.report, start)
        print(report.error, file=sys.stderr)
        return EXIT_VIOLATION
    report.after = _defect_summary(out, c)
    report.log = {"stabilizations": rec.to_dict(), "total": rec.total}
    write_curve(CurveFile.of(out, metadata={"stabilizations": str(rec.total)}), args.output)
    _finish(report, args.report, start)
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    if not 0 < args.eps < np.pi / 2:
        raise ConfigurationError("eps must lie in (0, pi/2)")
    paths = gen_corpus(args.count, args.seed, args.eps, args.output)
    print(f"wrote {len(paths)} curves to {args.output}")
    return EXIT_OK


def cmd_plot(args) -> int:
    cf = read_curve(args.input)
    plot(cf.curve(), args.proj, args.output, cf.metadata)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _engelize_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", dest="output", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--wrinkles", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="engel-horizon", description="Engel and Legendrian knot toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="defect and membership report")
    p.add_argument("input")
    p.add_argument("--eps", type=float)
    p.add_argument("--report")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("project", help="Geiges projection, stored as a legendrian-r3 curve")
    p.add_argument("input")
    p.add_argument("--to", choices=("front", "lagrangian", "geiges"), required=True)
    p.add_argument("-o", dest="output", required=True)
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("lift", help="lift a front or Lagrangian projection to R^4")
    p.add_argument("input")
    p.add_argument("--from", dest="from_", choices=("front", "lagrangian"), required=True)
    p.add_argument("--z0", type=float, default=0.0)
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--t0", type=float)
    p.add_argument("-o", dest="output", required=True)
    p.set_defaults(fn=cmd_lift)

    p = sub.add_parser("engelize", help="Engel knot near an eps-Engel knot")
    p.add_argument("input")
    _engelize_flags(p)
    p.set_defaults(fn=cmd_engelize)

    p = sub.add_parser("engelize-family", help="engelize a family stored as a directory of curves")
    p.add_argument("input")
    _engelize_flags(p)
    p.add_argument("--collar", type=float)
    p.set_defaults(fn=cmd_engelize_family)

    p = sub.add_parser("legendrize", help="Legendrian knot near an eps-Legendrian knot")
    p.add_argument("input")
    p.add_argument("-o", dest="output", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--report")
    p.set_defaults(fn=cmd_legendrize)

    p = sub.add_parser("gen-corpus", help="seeded random eps-Engel knots")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("-o", dest="output", required=True)
    p.set_defaults(fn=cmd_gen_corpus)

    p = sub.add_parser("plot", help="SVG of one projection")
    p.add_argument("input")
    p.add_argument("--proj", choices=PROJECTIONS, required=True)
    p.add_argument("-o", dest="output", required=True)
    p.set_defaults(fn=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return args.fn(args)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (MalformedInput, InvalidInputError, FileNotFoundError, IsADirectoryError) as e:
        print(f"malformed input: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    except ConstraintViolation as e:
        print(f"constraint violation: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
