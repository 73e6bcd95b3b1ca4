class CoopSimError(Exception):
    """Base class for all simulator errors."""


class DomainError(CoopSimError, ValueError):
    pass


class OverlapError(CoopSimError):
    """A spawn footprint intersects an existing agent."""


class PlacementExhausted(CoopSimError):
    """Rejection sampling ran out of attempts."""


class SingularInnovation(CoopSimError):
    pass


class ClockRegression(CoopSimError):
    pass


class NoRoute(CoopSimError):
    pass


class UnknownScenario(CoopSimError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class SpecError(CoopSimError):
    """Scenario document could not be turned into a valid scenario."""


class ParseError(SpecError):
    pass


class ValidationError(SpecError):
    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class IoError(CoopSimError, OSError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
