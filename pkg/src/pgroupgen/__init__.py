"""Finite p-group generation: pc presentations, covers, descendant trees, transfers."""

__version__ = "0.1.0"
