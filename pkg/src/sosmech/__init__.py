"""Randomized IC-IR auctions for interdependent SOS valuations."""

__version__ = "0.1.0"
