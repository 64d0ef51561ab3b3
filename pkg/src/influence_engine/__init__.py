"""Batch influence scoring over multi-network social interaction logs."""

__version__ = "0.1.0"
