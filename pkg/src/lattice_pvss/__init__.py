"""Lattice-based publicly verifiable secret sharing."""

__version__ = "0.1.0"
