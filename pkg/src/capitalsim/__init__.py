"""Seeded simulations of units of capital, with exact entropy and proposition checks."""

__version__ = "0.1.0"
