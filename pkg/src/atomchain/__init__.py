"""Effective spin chains of strongly interacting atoms in 1-D traps."""

__version__ = "0.1.0"
