"""Desk-scale drone-photography RL workbench."""

__version__ = "0.1.0"
