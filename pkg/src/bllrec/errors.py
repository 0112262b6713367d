"""Exception types shared across the pipeline stages."""


class BllrecError(Exception):
    """Base class for all bllrec errors."""


class UsageError(BllrecError):
    """Invalid configuration value or command-line usage."""


class DataError(BllrecError):
    """Input data violates a stage's contract (empty group, short history, ...)."""


class ParseError(DataError):
    """A malformed input line; carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no
