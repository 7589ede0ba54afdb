"""Exception types raised across the package."""


class NwciError(Exception):
    """Base class for all package errors."""


class NoLocalData(NwciError):
    """All kernel weights at the evaluation point vanished."""


class NoValidBandwidth(NwciError):
    """No grid bandwidth produced a usable selection score."""


class DegenerateSample(NwciError):
    """The sample has no spread where spread is required."""


class ZeroEffectiveSample(NwciError):
    """An interval was requested with a local equivalent sample size of zero."""


class InvalidSample(NwciError, ValueError):
    pass


class ParseError(NwciError):
    def __init__(self, row: int, column: str, reason: str):
        self.row = row
        self.column = column
        self.reason = reason
        super().__init__(f"line {row}, column {column!r}: {reason}")


class SchemaError(NwciError):
    pass


class Separation(NwciError):
    """Logistic coefficients diverge (complete or quasi-complete separation)."""


class Degenerate(NwciError):
    pass


class NotConverged(NwciError):
    pass


class TooFewGroups(NwciError):
    pass
