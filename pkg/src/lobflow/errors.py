"""Exception hierarchy.

Three branches matter to the CLI exit-code mapping: ConfigError (bad
options / invalid generator configuration), DataError (malformed or
inconsistent market data), NumericalError (a fit or estimator could not
produce a result). Everything raised by this package derives from
LobflowError.
"""


class LobflowError(Exception):
    pass


class ConfigError(LobflowError):
    """Invalid configuration or options (CLI exit code 2)."""


class DataError(LobflowError):
    """Malformed or internally inconsistent input data (CLI exit code 3)."""


class NumericalError(LobflowError):
    """Numerical failure inside an estimator (CLI exit code 4)."""


# --- parsing -----------------------------------------------------------------

class MalformedRecord(DataError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownKind(DataError):
    pass


class NonPositiveSize(DataError):
    pass


# --- book replay -------------------------------------------------------------

class UnknownOrderId(DataError):
    pass


class DuplicateOrderId(DataError):
    pass


class CancelExceedsResting(DataError):
    pass


class ExecuteExceedsVisibleDepth(DataError):
    pass


class CrossingLimitOrder(DataError):
    pass


class EmptySide(DataError):
    pass


# --- metrics -----------------------------------------------------------------

class InsufficientDepth(DataError):
    def __init__(self, requested: int, available: int):
        super().__init__(f"requested {requested} shares, only {available} visible")
        self.requested = requested
        self.available = available


# --- bucketing ---------------------------------------------------------------

class WindowTooLong(DataError):
    pass


class DegenerateWindow(NumericalError):
    pass


class TooFewBuckets(DataError):
    pass


# --- statistics --------------------------------------------------------------

class DimensionMismatch(DataError):
    pass


class RankDeficient(NumericalError):
    pass


class TooFewPoints(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class DegenerateAlpha1(NumericalError):
    pass


class ZeroVarianceResiduals(NumericalError):
    pass


class DidNotConverge(NumericalError):
    pass


class SingleClass(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class ZeroVariance(NumericalError):
    pass


# --- synthesis ---------------------------------------------------------------

class InvalidConfig(ConfigError):
    pass
