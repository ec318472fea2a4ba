"""Exact-arithmetic engine for randomness requirements of repeated-game equilibria."""

__version__ = "0.1.0"
