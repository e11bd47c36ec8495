"""Fixed, periodic, stable and attracting sets of self-maps, computed exactly."""

from .errors import InputError, StabsetError, VerificationError

__version__ = "0.1.0"

__all__ = ["InputError", "StabsetError", "VerificationError", "__version__"]
