"""Exception hierarchy shared across the toolkit."""


class GeopromptError(Exception):
    """Base class for all toolkit errors."""


class LayoutValidationError(GeopromptError, ValueError):
    """A layout failed invariant checks; carries the full violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CoordinateRangeError(GeopromptError, ValueError):
    """A coordinate fell outside the image extent."""


class TokenRangeError(GeopromptError, ValueError):
    """A token index fell outside the vocabulary."""


class TokenParseError(GeopromptError, ValueError):
    """A lexical token could not be parsed back to an index."""


class PromptTemplateError(GeopromptError, ValueError):
    """A layout lacks a field the prompt template requires."""


class PromptParseError(GeopromptError, ValueError):
    """A prompt string could not be parsed; carries the offending phrase index."""

    def __init__(self, message, phrase_index=None):
        super().__init__(message)
        self.phrase_index = phrase_index


class NotEncodableError(GeopromptError, ValueError):
    """A projected 3D box cannot be tokenized (invisible or out-of-frame corner)."""


class ManifestError(GeopromptError, ValueError):
    """An annotation file violated its schema."""


class ReferentialIntegrityError(ManifestError):
    """An annotation referenced a category or image that does not exist."""


class BinaryFormatError(GeopromptError, ValueError):
    """A binary mask/embedding file is malformed or truncated."""
