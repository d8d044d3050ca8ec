"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`ConstraintViolation` and its
subclasses exit 1, :class:`MalformedInput` exits 2, :class:`ConfigurationError`
exits 3.
"""


class EngelError(Exception):
    pass


class InvalidInputError(EngelError, ValueError):
    pass


class MalformedInput(EngelError, ValueError):
    pass


class ParseError(MalformedInput):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


class ArityError(MalformedInput):
    pass


class VersionError(MalformedInput):
    pass


class ConfigurationError(EngelError, ValueError):
    pass


class ConstraintViolation(EngelError):
    pass


class CuspError(ConstraintViolation):
    """Front has a vertical tangency where a graphical one is required."""

    def __init__(self, message, param=None):
        super().__init__(message if param is None else f"{message} at t={param:.6g}")
        self.param = param


class InvalidWindowError(ConstraintViolation):
    pass


class PlacementError(ConstraintViolation):
    pass


class KinkLookupError(EngelError, KeyError):
    pass


class CapacityError(ConstraintViolation):
    def __init__(self, message, controller=None):
        super().__init__(message)
        self.controller = controller


class BudgetError(ConstraintViolation):
    """C0 budget exceeded; ``overshoot`` is the measured distance minus eta."""

    def __init__(self, message, overshoot=None):
        super().__init__(message)
        self.overshoot = overshoot


class SurgeryCollisionError(ConstraintViolation):
    pass


class ResolutionError(ConstraintViolation):
    pass


class GenericityError(ConstraintViolation):
    pass


class BoundaryConditionError(ConstraintViolation):
    pass


class ImmersionError(ConstraintViolation):
    pass
