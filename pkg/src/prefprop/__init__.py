"""Propagating preference uncertainty through weighted-sum multi-objective optimization."""

__version__ = "0.1.0"
