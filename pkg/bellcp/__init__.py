"""bellcp - exact probability, simulation and statistics for Bohm-Bell experiments."""

__version__ = "0.1.0"
