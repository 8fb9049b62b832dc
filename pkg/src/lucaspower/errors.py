"""Exception hierarchy shared by the toolkit.

Each class carries the CLI exit code that reports it.
"""


class LucasPowerError(Exception):
    exit_code = 1


class DomainError(LucasPowerError, ValueError):
    """An operation was applied outside its mathematical domain."""

    exit_code = 5


class PrecisionError(LucasPowerError):
    """A certified decision could not be reached below the precision ceiling."""

    exit_code = 3


class ReductionError(LucasPowerError):
    """No convergent produced a certified positive epsilon."""

    exit_code = 4

    def __init__(self, message, attempts=()):
        super().__init__(message)
        self.attempts = list(attempts)


class StageError(LucasPowerError):
    exit_code = 5

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.detail = message


class CertificateError(LucasPowerError, ValueError):
    """The certificate document is structurally malformed."""

    exit_code = 5
