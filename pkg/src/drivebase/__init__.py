"""Baseline-referenced assessment of driver behaviour under distraction."""

__version__ = "0.1.0"
