"""Explicit reciprocity laws for Lubin–Tate formal groups over higher local fields."""

__version__ = "0.1.0"
