"""Characteristic connections of naturally reductive left-invariant structures."""

__version__ = "0.1.0"
