"""Exceptions shared across modules."""


class SizeLimitError(ValueError):
    """An exact enumeration was requested beyond the configured size limit."""
