"""Exception hierarchy shared by every module.

Library code raises these; only the command line turns them into exit codes.
"""


class QslError(Exception):
    """Base error of the toolkit."""

    exit_code = 3

    def __init__(self, message):
        super().__init__(message)


# Input validation (exit code 2)


class ValidationError(QslError):
    exit_code = 2


class NotSquare(ValidationError):
    pass


class NotHermitian(ValidationError):
    def __init__(self, asymmetry: float, allowed: float):
        self.asymmetry = asymmetry
        self.allowed = allowed
        super().__init__(
            f"Matrix is not Hermitian: ||M - M*|| = {asymmetry:.3e} exceeds {allowed:.3e}."
        )


class RankDeficient(ValidationError):
    def __init__(self, column: int, residual: float, column_norm: float):
        self.column = column
        self.residual = residual
        self.column_norm = column_norm
        super().__init__(
            f"Column {column} is linearly dependent on the previous ones: "
            f"residual {residual:.3e} for a column of norm {column_norm:.3e}."
        )


class InvalidFrame(ValidationError):
    pass


class InvalidProjector(ValidationError):
    pass


class InvalidState(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class ZeroSubspace(ValidationError):
    pass


class InvalidTheta(ValidationError):
    def __init__(self, theta: float):
        self.theta = theta
        super().__init__(f"Angle {theta!r} is outside (0, pi/2].")


class NonpositiveHorizon(ValidationError):
    pass


class InvalidTime(ValidationError):
    pass


class DegenerateLevels(ValidationError):
    pass


class UnsupportedSolver(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, path: str = "", line: int | None = None):
        self.path = path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path:
            where.append(f"at '{path}'")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


# Numerical failures (exit code 3)


class NumericalError(QslError):
    exit_code = 3


class EigensolverFailure(NumericalError):
    pass


class SvdFailure(NumericalError):
    pass


class NumericalInconsistency(NumericalError):
    pass


class OptimizerDidNotConverge(NumericalError):
    def __init__(self, message, result=None):
        self.result = result
        super().__init__(message)


# Bounds that do not exist for degenerate instances (exit code 3)


class UndefinedBound(QslError):
    exit_code = 3


class ZeroDispersion(UndefinedBound):
    pass


class ZeroMeanExcess(UndefinedBound):
    pass


class ZeroSpeed(UndefinedBound):
    pass


class ZeroWidth(UndefinedBound):
    pass


class PropertyViolation(QslError):
    exit_code = 1
