"""Base class for domain errors so the CLI can map them to exit code 1."""


class DomainError(Exception):
    """Any expected, user-reportable failure raised by this package."""
