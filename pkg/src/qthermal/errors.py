"""Exception hierarchy shared by all qthermal modules."""


class QThermalError(Exception):
    """Base class for every error raised by this package."""


class NetlistError(QThermalError, ValueError):
    """A circuit description is malformed or violates a structural invariant."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        if self.line is None:
            return self.message
        if self.column is None:
            return f"line {self.line}: {self.message}"
        return f"line {self.line}, col {self.column}: {self.message}"


class ParameterPathError(NetlistError):
    """A sweep/parameter address does not resolve to exactly one scalar."""


class SolverError(QThermalError):
    """Base class for failures of the steady-state or time-evolution solvers."""


class NonUniqueSteadyState(SolverError):
    def __init__(self, nullity, message=None):
        self.nullity = nullity
        super().__init__(message or f"Liouvillian null space has dimension >= {nullity}")


class SolverFailure(SolverError):
    pass


class DimensionError(SolverError):
    pass


class StepSizeError(SolverError):
    pass


class ObservableError(QThermalError, ValueError):
    """An observable is undefined for the given state."""


class InfiniteTemperature(ObservableError):
    pass


class DegeneratePopulation(ObservableError):
    pass


class BalancedLink(ObservableError):
    """Transfer function requested on a link with zero thermal potential."""
