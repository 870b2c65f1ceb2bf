"""Exception types shared across the package."""


class ErwError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ErwError):
    """A document or value could not be interpreted."""


class DomainError(ErwError):
    """Arguments are well formed but outside an operation's domain."""


class UnknownPresetError(ErwError, KeyError):
    """Requested preset name is not registered."""

    def __str__(self):
        return self.args[0] if self.args else ""


class CapacityError(ErwError):
    """Request exceeds an explicit resource bound."""
