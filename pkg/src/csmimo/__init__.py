"""Compressive sensing for MIMO radar: simulation, sparse recovery and analysis."""

__version__ = "0.1.0"
