"""Personalized cricket shot-zone prediction and what-if tactics engine."""

__version__ = "0.1.0"
