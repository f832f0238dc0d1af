"""Domain exceptions for the intent translator."""


class IntentTranslatorError(ValueError):
    """Base class for all domain errors raised by the library."""


class IllegalActionError(IntentTranslatorError):
    """An action was applied to a state in which it is not legal."""


class InvalidTroopCountError(IntentTranslatorError):
    """Battle troop counts violate the combat preconditions."""


class InvalidInitializationError(IntentTranslatorError):
    """A map initialization overlaps or does not deploy exactly 14 troops."""


class OutOfRangeError(IntentTranslatorError):
    """A goal value lies outside [-100, 100]."""


class InfeasibleIntentError(IntentTranslatorError):
    """No 14-troop placement satisfies every constraint of an intent."""


class CorpusParseError(IntentTranslatorError):
    """A corpus line is not a well-formed record."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class CorpusValidationError(IntentTranslatorError):
    """A corpus record parsed but violates an invariant."""

    def __init__(self, message: str, line_number: int | None = None):
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line_number = line_number


class NonSquareError(IntentTranslatorError):
    """The assignment cost matrix is not square."""


class DimensionMismatchError(IntentTranslatorError):
    """A feature vector does not match the model's input dimension."""


class EmptyCorpusError(IntentTranslatorError):
    """Training was requested on an empty corpus."""


class DivergedLossError(IntentTranslatorError):
    """Training produced a non-finite loss."""


class TooFewExamplesError(IntentTranslatorError):
    """The corpus is smaller than the requested number of folds."""


class UnknownEncoderError(IntentTranslatorError):
    """The requested state encoder id does not exist."""


class UnknownTerritoryError(IntentTranslatorError):
    """A territory name is not on the board."""
