"""Desk-scale emulation of an earpiece/smartphone local-inference assistant."""

__version__ = "0.1.0"
