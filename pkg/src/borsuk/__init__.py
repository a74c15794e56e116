"""Stochastic minimax-diameter partitions of universal covering sets."""

__version__ = "0.1.0"
