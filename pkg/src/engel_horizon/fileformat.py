"""Curve and report files: UTF-8 JSON with sorted keys and 17-digit numbers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core_geometry import DiscreteCurve, FormalEngelKnot
from .errors import ArityError, InvalidInputError, ParseError, VersionError
from .legendrian import LegendrianCurve

FORMAT_VERSION = 1
ARITY = {"engel-r4": 4, "legendrian-r3": 3}


@dataclass
class CurveFile:
    space: str
    closed: bool
    samples: np.ndarray
    formal: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.version != FORMAT_VERSION:
            raise VersionError(f"unsupported curve file version {self.version!r}")
        if self.space not in ARITY:
            raise ParseError(f"unknown space {self.space!r}", field="space")
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != ARITY[self.space]:
            raise ArityError(f"space {self.space} needs {ARITY[self.space]}-tuples, got shape {s.shape}")
        self.samples = s
        if self.formal is not None:
            f = np.asarray(self.formal, dtype=float)
            if f.shape != (s.shape[0], 2):
                raise ArityError("formal must hold one (a, b) pair per sample")
            self.formal = f
        self.metadata = {str(k): str(v) for k, v in self.metadata.items()}

    def curve(self):
        """The sampled curve as a library object (uniform parameters)."""
        if self.space == "engel-r4":
            return DiscreteCurve(self.samples, self.closed)
        return LegendrianCurve(self.samples, self.closed)

    def formal_knot(self) -> FormalEngelKnot:
        if self.space != "engel-r4" or self.formal is None:
            raise InvalidInputError("file carries no formal line field")
        return FormalEngelKnot(self.curve(), self.formal)

    @classmethod
    def of(cls, curve, formal=None, metadata=None) -> "CurveFile":
        space = "engel-r4" if isinstance(curve, DiscreteCurve) else "legendrian-r3"
        return cls(space, bool(curve.closed), np.array(curve.points), formal, dict(metadata or {}))


def _num(v: float) -> str:
    if not math.isfinite(v):
        raise InvalidInputError("non-finite numbers cannot be written")
    return "%.17g" % v


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, floats at 17 significant digits, one row per line."""

    def enc(o, depth):
        pad = "  " * (depth + 1)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(o[k], depth + 1)}" for k in sorted(o, key=str)]
            return "{\n" + ",\n".join(items) + "\n" + "  " * depth + "}"
        if isinstance(o, np.ndarray):
            o = o.tolist()
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(isinstance(e, (int, float, np.number)) and not isinstance(e, bool) for e in o):
                return "[" + ", ".join(enc(e, depth) for e in o) + "]"
            return "[\n" + ",\n".join(pad + enc(e, depth + 1) for e in o) + "\n" + "  " * depth + "]"
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if o is None:
            return "null"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _num(float(o))
        return json.dumps(str(o))

    return enc(obj, 0) + "\n"


def curve_to_dict(cf: CurveFile) -> dict:
    d = {"version": cf.version, "space": cf.space, "closed": cf.closed, "samples": cf.samples, "metadata": cf.metadata}
    if cf.formal is not None:
        d["formal"] = cf.formal
    return d


def write_curve(cf: CurveFile, path) -> None:
    Path(path).write_text(dumps(curve_to_dict(cf)), encoding="utf-8")


def _line_of(text: str, key: str) -> Optional[int]:
    needle = json.dumps(key) + ":"
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def parse_curve(text: str) -> CurveFile:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno) from None
    if not isinstance(d, dict):
        raise ParseError("top level must be an object", line=1)
    if "version" not in d:
        raise ParseError("missing required field", field="version")
    if d["version"] != FORMAT_VERSION or isinstance(d["version"], bool):
        raise VersionError(f"unsupported curve file version {d['version']!r}")
    for key in ("space", "closed", "samples"):
        if key not in d:
            raise ParseError("missing required field", field=key)
    if not isinstance(d["closed"], bool):
        raise ParseError("closed must be true or false", line=_line_of(text, "closed"), field="closed")
    rows = d["samples"]
    if not isinstance(rows, list) or not rows:
        raise ParseError("samples must be a non-empty list", line=_line_of(text, "samples"), field="samples")
    want = ARITY.get(d["space"])
    if want is None:
        raise ParseError(f"unknown space {d['space']!r}", line=_line_of(text, "space"), field="space")
    for j, row in enumerate(rows):
        if not isinstance(row, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise ParseError(f"sample {j} is not a list of numbers", line=_line_of(text, "samples"), field="samples")
        if len(row) != want:
            raise ArityError(f"sample {j} has {len(row)} coordinates; space {d['space']} needs {want}")
    meta = d.get("metadata", {})
    if not isinstance(meta, dict):
        raise ParseError("metadata must be an object", line=_line_of(text, "metadata"), field="metadata")
    try:
        return CurveFile(d["space"], d["closed"], rows, d.get("formal"), meta, d["version"])
    except ArityError:
        raise
    except (ValueError, TypeError) as e:
        raise ParseError(str(e), field="formal") from None


def read_curve(path) -> CurveFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"not UTF-8: {e}") from None
    return parse_curve(text)


def write_report(report: dict, path) -> None:
    Path(path).write_text(dumps(report), encoding="utf-8")
