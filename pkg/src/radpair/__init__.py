"""Radical-pair spin dynamics: yields, negativity and CHSH witnesses."""

__version__ = "0.1.0"
