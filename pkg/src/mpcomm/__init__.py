"""Multiparty broadcast communication: protocols, cat-state simulation and lower-bound checks."""

__version__ = "0.1.0"
