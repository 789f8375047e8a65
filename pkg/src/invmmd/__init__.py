"""Shift-invariant kernel two-sample tests for functional data."""
__version__ = "0.1.0"
