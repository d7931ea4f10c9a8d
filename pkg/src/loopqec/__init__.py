"""Timing, resource and threshold models for looped qubit pipelines."""

__version__ = "0.1.0"
