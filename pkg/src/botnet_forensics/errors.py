"""Exception types raised by the pipeline stages."""


class ForensicsError(Exception):
    """Base class for all errors raised by this package."""


class BadMagic(ForensicsError):
    pass


class TruncatedCapture(ForensicsError):
    pass


class Unreadable(ForensicsError):
    pass


class Unwritable(ForensicsError):
    pass


class EmptyDataset(ForensicsError):
    pass


class LengthMismatch(ForensicsError):
    pass


class TooManyFlows(ForensicsError):
    pass


class KTooLarge(ForensicsError):
    pass


class UnknownFlowId(ForensicsError):
    pass


class InvalidConfig(ForensicsError):
    pass


class StageError(ForensicsError):
    """Wraps an error with the name of the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
