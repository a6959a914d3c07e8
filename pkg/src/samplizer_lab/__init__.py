"""Desk-scale simulation of sample-based quantum algorithms for entropy estimation."""

__version__ = "0.1.0"
