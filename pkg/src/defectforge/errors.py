"""Errors shared across modules."""


class ParseError(ValueError):
    """A dataset, annotation, or predictions file could not be parsed.

    Messages carry the file path and, where available, line context.
    """
