"""Exception types shared across the package."""


class NadsError(Exception):
    """Base class for all errors raised by :mod:`nads`."""


class DomainError(NadsError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class SingularChannelError(NadsError, ArithmeticError):
    """The two-state channel has no unique stationary reception law."""


class ConfigError(NadsError, ValueError):
    """A sweep configuration is malformed or names an unknown key."""
