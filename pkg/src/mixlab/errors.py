"""Shared exception types."""


class CapacityError(ValueError):
    """An exact operation was asked for more sites than its enumeration limit."""


class ModelFormatError(ValueError):
    """A model file could not be parsed; carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no
