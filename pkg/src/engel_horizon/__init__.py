"""Engel knots in the Darboux model: checking, projecting, lifting and extension to genuine Engel knots."""

from .core_geometry import (
    TOL_ENGEL,
    DefectReport,
    DiscreteCurve,
    FormalEngelKnot,
    Point4,
    TangencySet,
    curve_angles,
    curve_defect,
    embeddedness_check,
    engel_frame,
    is_epsilon_engel,
    is_generic_knot,
    kernel_tangency_set,
    scanning,
    sup_distance,
    tangency_angle,
    verify_engel_condition,
)
from .engelization import (
    CurveFamily,
    EngelizeConfig,
    SurgeryLog,
    collar_schedule,
    convex_integrate,
    engelize,
    engelize_family,
    engelize_with_log,
    repair_tangency_locus,
)
from .fileformat import CurveFile, read_curve, write_curve
from .legendrian import (
    LegendrianCurve,
    StabilizationRecord,
    action_lift,
    legendrian_defect,
    legendrize,
    rotation_number,
    stabilize,
    z_closure_defect,
)
from .projections import (
    Front,
    GeigesCurve,
    LagrangianPlaneCurve,
    closure_defects,
    front_lift,
    front_project,
    geiges_project,
    lagrangian_lift,
    lagrangian_project,
)

__all__ = [
    "CurveFamily",
    "CurveFile",
    "DefectReport",
    "DiscreteCurve",
    "EngelizeConfig",
    "FormalEngelKnot",
    "Front",
    "GeigesCurve",
    "LagrangianPlaneCurve",
    "LegendrianCurve",
    "Point4",
    "StabilizationRecord",
    "SurgeryLog",
    "TOL_ENGEL",
    "TangencySet",
    "action_lift",
    "closure_defects",
    "collar_schedule",
    "convex_integrate",
    "curve_angles",
    "curve_defect",
    "embeddedness_check",
    "engel_frame",
    "engelize",
    "engelize_family",
    "engelize_with_log",
    "front_lift",
    "front_project",
    "geiges_project",
    "is_epsilon_engel",
    "is_generic_knot",
    "kernel_tangency_set",
    "lagrangian_lift",
    "lagrangian_project",
    "legendrian_defect",
    "legendrize",
    "read_curve",
    "repair_tangency_locus",
    "rotation_number",
    "scanning",
    "stabilize",
    "sup_distance",
    "tangency_angle",
    "verify_engel_condition",
    "write_curve",
    "z_closure_defect",
]

__version__ = "0.1.0"
