"""Exception hierarchy shared by every module of the package."""


class AnisonetError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(AnisonetError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class UnsupportedExponentError(InvalidArgumentError):
    """Exponents outside 1 < p < inf, 1 <= q <= inf."""


class ParseError(AnisonetError, ValueError):
    """Malformed grid file. ``line`` is 1-based."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UndefinedRatioError(AnisonetError, ArithmeticError):
    pass


class DivergenceError(AnisonetError, ArithmeticError):
    """A quadrature that did not settle under lattice widening.

    ``history`` holds the successive estimates that were tried.
    """

    def __init__(self, message, history=()):
        self.history = tuple(history)
        super().__init__(message)
