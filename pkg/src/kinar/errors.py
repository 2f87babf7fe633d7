"""Exception types raised by kinar.

Numerical failures derive from :class:`NumericalError`; configuration
problems derive from :class:`ConfigError`. The command line maps these two
families onto distinct exit codes.
"""


class KinarError(Exception):
    """Base class for all kinar errors."""


class NumericalError(KinarError):
    """A computation hit a degenerate or non-physical configuration."""


class ConfigError(KinarError):
    """A scene or input file is malformed or violates an invariant."""


class FrameMismatch(KinarError):
    def __init__(self, expected, got):
        super().__init__(f"frame mismatch: expected {expected!r}, got {got!r}")
        self.expected = expected
        self.got = got


class NoPath(KinarError):
    pass


class InconsistentGraph(KinarError):
    pass


class DegenerateFeaturePoints(NumericalError):
    pass


class BehindCamera(NumericalError):
    def __init__(self, depth):
        super().__init__(f"point is behind the camera (depth {depth:.6g} mm)")
        self.depth = depth


class NoConvergence(NumericalError):
    def __init__(self, residual, iterations):
        super().__init__(
            f"undistortion did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


class TooFewPoints(NumericalError):
    pass


class DegenerateConfiguration(NumericalError):
    pass


class SingularIntrinsics(NumericalError):
    pass


class NonPhysical(NumericalError):
    pass


class EmptyInput(NumericalError):
    pass


class EmptyGrid(NumericalError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:{column}:" if column is not None else f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.message = message
        self.line = line
        self.column = column
        self.path = path


class ValidationError(ConfigError):
    pass
