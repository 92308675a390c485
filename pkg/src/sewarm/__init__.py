"""Closed-form human-to-robot arm retargeting with a self-collision safety filter."""

__version__ = "0.1.0"
