class SkiOrderError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInputError(SkiOrderError, ValueError):
    pass


class LengthMismatchError(SkiOrderError, ValueError):
    pass


class DegenerateMatrixError(SkiOrderError, ValueError):
    """Every row was dropped (or the matrix has zero rank)."""


class InvalidShapeError(SkiOrderError, ValueError):
    pass


class KneeUndefinedError(SkiOrderError):
    """The singular curve has fewer than three non-zero values."""


class GeometryError(SkiOrderError, ValueError):
    pass


class NumericalError(SkiOrderError, ArithmeticError):
    pass


class ConfigError(SkiOrderError, ValueError):
    pass


class SimulationDivergedError(SkiOrderError, ArithmeticError):
    def __init__(self, model: str, step: int):
        super().__init__(f"{model} simulation produced non-finite state at step {step}")
        self.model = model
        self.step = step


class ParseError(SkiOrderError, ValueError):
    pass
