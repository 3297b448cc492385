"""Finite-model workbench for first-order properties of sparse random graphs."""

__version__ = "0.1.0"
