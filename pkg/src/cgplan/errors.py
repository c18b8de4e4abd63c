"""Exception types shared across the package."""


class CgplanError(Exception):
    """Base class for package errors."""


class MapError(CgplanError):
    pass


class IllegalAction(CgplanError):
    pass


class ParseError(CgplanError):
    """Constraint text failed to parse. Carries the character position."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NonNumericTroops(ParseError):
    """Troop count missing, empty, or not a number."""


class EmptySequence(CgplanError):
    pass


class ExtractionParseError(CgplanError):
    pass


class ProviderError(CgplanError):
    pass


class MissingReplayEntry(ProviderError):
    pass


class MalformedResponse(CgplanError):
    pass


class LogprobUnavailable(CgplanError):
    pass


class UnboundVariable(CgplanError):
    """A prompt template placeholder was left unbound."""


class NoLegalAction(CgplanError):
    pass


class EnumerationBudgetExceeded(CgplanError):
    pass


class UndefinedVariable(CgplanError):
    """An arithmetic step referenced a variable with no binding."""

    def __init__(self, name: str, step_id: int):
        super().__init__(f"variable {name!r} is unbound at step {step_id}")
        self.name = name
        self.step_id = step_id


class DivisionByZero(CgplanError):
    def __init__(self, step_id: int):
        super().__init__(f"division by zero at step {step_id}")
        self.step_id = step_id


class NonIntegerAnswer(CgplanError):
    pass


class SchemaError(CgplanError):
    pass


class MismatchedExampleSets(CgplanError):
    pass
