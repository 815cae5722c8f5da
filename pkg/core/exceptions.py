"""Error hierarchy shared by every solver and the simulate command."""


class SimulationError(Exception):
    exit_status = 2

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self):
        return f"[{self.code}] {self.message}"


class ConfigurationError(SimulationError):
    """Invalid run configuration. ``issues`` holds (line, message) pairs."""

    exit_status = 1

    def __init__(self, issues, code: str = "config"):
        self.issues = list(issues)
        message = "; ".join(
            f"line {line}: {text}" if line else text for line, text in self.issues
        )
        super().__init__(code, message)


class InvalidParameterError(ConfigurationError):
    def __init__(self, message: str):
        super().__init__([(None, message)], code="invalid_parameter")


class SingularInputError(SimulationError):
    def __init__(self, message: str):
        super().__init__("singular_input", message)


class StiffnessError(SimulationError):
    def __init__(self, xi: float, message: str = ""):
        self.xi = xi
        super().__init__("stiffness", f"step size underflow at xi={xi:.17g}. {message}".strip())


class DegenerateBranchError(SimulationError):
    def __init__(self, message: str):
        super().__init__("degenerate_branch", message)


class DegenerateOrbitError(SimulationError):
    def __init__(self, message: str):
        super().__init__("degenerate_orbit", message)


class UndefinedStatisticsError(SimulationError):
    def __init__(self, message: str):
        super().__init__("undefined_statistics", message)


class NoMinimumError(SimulationError):
    def __init__(self, message: str):
        super().__init__("no_minimum", message)


class QuadratureError(SimulationError):
    def __init__(self, message: str):
        super().__init__("quadrature", message)


class EigensolverError(SimulationError):
    def __init__(self, sector_key, message: str):
        self.sector_key = sector_key
        super().__init__("eigensolver", f"sector {sector_key}: {message}")


class DomainError(SimulationError):
    def __init__(self, message: str):
        super().__init__("domain", message)


class CorrelationUnderflowError(SimulationError):
    def __init__(self, message: str):
        super().__init__("correlation_underflow", message)
