class SeroclassException(Exception):
    pass

# Categories; the CLI maps each of them onto one exit code.

class ConfigurationException(SeroclassException):
    pass

class DataException(SeroclassException):
    pass

class NumericalException(SeroclassException):
    pass


class InvalidConfigException(ConfigurationException):
    pass

class UnknownFamilyException(ConfigurationException):
    pass

class InvalidPrevalenceException(ConfigurationException):
    pass

class InvalidParameterException(ConfigurationException):
    pass


class MissingInputException(DataException):
    pass

class MissingColumnException(DataException):
    pass

class RowParseException(DataException):
    def __init__(self, message: str, line_number: int):
        super().__init__(message)
        self.line_number = line_number

class EmptyOutputException(DataException):
    pass

class EmptyInputException(DataException):
    pass

class PreconditionNotMetException(DataException):
    pass

class OutsideDomainException(DataException):
    pass

class DomainMismatchException(DataException):
    pass

class GridMismatchException(DataException):
    pass


class ZeroMassException(NumericalException):
    pass

class NonFiniteDensityException(NumericalException):
    pass

class LowAcceptanceException(NumericalException):
    pass

class OptimizerFailureException(NumericalException):
    pass

class SeparationFailureException(NumericalException):
    def __init__(self, message: str, trace=()):
        super().__init__(message)
        self.trace = list(trace)

class ReplayMismatchException(NumericalException):
    def __init__(self, message: str, mismatched=()):
        super().__init__(message)
        self.mismatched = list(mismatched)
