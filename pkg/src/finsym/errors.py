"""Exception types shared across the package."""


class FinsymError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FinsymError):
    """Evaluation requested outside a declared domain or at a singular point."""


class OrderError(FinsymError):
    """Requested derivative order exceeds what a jet can represent."""


class ParseError(FinsymError):
    """Malformed expression text.

    Carries ``position``, the 0-based offset of the offending token.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownVariableError(ParseError):
    """Expression references an identifier that was not declared."""


class ZeroVectorError(FinsymError):
    """A vector field dropped below its nowhere-zero floor."""


class SingularChartError(FinsymError):
    """Chart map has a (numerically) singular or inconsistent Jacobian."""


class NonPositiveError(FinsymError):
    """A metric function came out non-positive on the slit domain."""


class NotPositiveDefiniteError(FinsymError):
    """The fundamental tensor failed the positive-definiteness test."""


class OddDimensionError(FinsymError):
    """An even-dimensional chart was required."""


class DimensionMismatchError(FinsymError):
    """Two objects that must share a dimension do not."""


class NotRandersError(FinsymError):
    """Operation requires a Randers-family metric."""


class NotMinkowskianError(FinsymError):
    """Metric is not locally Minkowskian in the given coordinates."""


class ConfigError(FinsymError):
    """Scenario configuration rejected.

    ``json_path`` points at the offending field, JSON-pointer style
    (e.g. ``/metric/family``).
    """

    def __init__(self, message: str, json_path: str = ""):
        super().__init__(f"{json_path or '/'}: {message}")
        self.json_path = json_path
