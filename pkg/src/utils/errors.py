# error hierarchy shared by the library and the command line runner
class DecouplingError(Exception):
    category = "error"
    exit_code = 1


class ConfigError(DecouplingError, ValueError):
    category = "config"
    exit_code = 2


class InvalidDimensionError(ConfigError):
    pass


class ShapeError(ConfigError):
    pass


class InvalidInputError(ConfigError):
    pass


class InvalidStateError(ConfigError):
    pass


class AssumptionError(DecouplingError):
    category = "assumption"
    exit_code = 3

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class InfeasibleError(DecouplingError):
    category = "infeasible"
    exit_code = 3


class IntegrationError(DecouplingError):
    category = "numerical"
    exit_code = 4


class SingularityError(IntegrationError):
    pass


class OutputError(DecouplingError):
    category = "io"
    exit_code = 5

    def __init__(self, path, cause):
        super().__init__(f"{path}: {cause}")
        self.path = path
        self.cause = cause
