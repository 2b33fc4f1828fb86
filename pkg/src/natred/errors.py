"""Exceptions shared by the pipelines."""


class DegenerateParameters(ValueError):
    """Parameters at which the construction is undefined (a = 0, singular decomposition)."""
