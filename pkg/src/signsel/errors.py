"""Exception types raised by the package."""


class SignSelError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SignSelError, ValueError):
    """Unsupported option or out-of-range algorithm parameter."""


class ArgumentError(SignSelError, ValueError):
    """Malformed input: wrong length, empty array, wrong bit count."""


class CapacityError(SignSelError, ValueError):
    """Problem size exceeds what the requested method can handle."""


class DomainError(SignSelError, ValueError):
    """Formula evaluated outside its domain of validity."""


class DecodeError(SignSelError, ValueError):
    """Received symbol is not in the constellation up to sign."""


class StateError(SignSelError, RuntimeError):
    """Incremental state used out of order."""
