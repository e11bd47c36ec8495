"""Exception types shared by every analysis module."""


class StabsetError(Exception):
    """Base class for errors raised by this package."""


class InputError(StabsetError, ValueError):
    """Raised for malformed input or a violated precondition."""


class VerificationError(StabsetError):
    """Raised when an identity that must hold exactly fails.

    This never signals bad input; it means the implementation (or the
    mathematics being checked) is wrong.
    """
