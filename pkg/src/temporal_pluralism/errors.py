"""Shared exception base; every domain failure raised by this package derives from it."""


class PluralismError(Exception):
    """Base class for all domain errors (parse failures, invalid machines, scoring errors)."""
