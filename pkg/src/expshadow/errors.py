"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end:
2 for malformed input or bad parameters, 1 for a property that fails (the
exception then carries a machine-readable ``witness``), 3 for resource caps.
"""


class ExpShadowError(Exception):
    exit_code = 2

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness

    def to_json(self):
        out = {"error": type(self).__name__, "message": str(self)}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


# -- validation errors (exit 2) ------------------------------------------------

class ParseError(ExpShadowError):
    pass


class MetricError(ExpShadowError):
    pass


class MapError(ExpShadowError):
    pass


class SizeMismatch(ExpShadowError):
    pass


class BadThresholds(ExpShadowError):
    pass


class BadParameters(ExpShadowError):
    pass


class BadPeriod(ExpShadowError):
    pass


# -- property failures (exit 1) ------------------------------------------------

class PropertyFailure(ExpShadowError):
    exit_code = 1


class NotExpansive(PropertyFailure):
    pass


class NotTransitive(PropertyFailure):
    pass


class NotCompatible(PropertyFailure):
    pass


class NotSemiExpansive(PropertyFailure):
    pass


class NotUSemiExpansive(PropertyFailure):
    pass


class NotSemiAnosov(PropertyFailure):
    pass


class AlphaTooLarge(PropertyFailure):
    pass


class NoShadowingPoint(PropertyFailure):
    pass


class NoSuchRho(PropertyFailure):
    pass


class DegenerateMetric(PropertyFailure):
    pass


class InvariantViolation(PropertyFailure):
    """A condition guaranteed by the theory came back false: a bug, not data."""


class AmbiguousClass(InvariantViolation):
    pass


# -- resource limits (exit 3) --------------------------------------------------

class ResourceLimit(ExpShadowError):
    exit_code = 3


class TooLarge(ResourceLimit):
    pass
