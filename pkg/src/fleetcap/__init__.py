"""Fishing-capacity measurement by DEA, lag models of capacity and utilization, and tax simulation."""

__version__ = "0.1.0"
