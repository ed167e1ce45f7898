"""Liouville-space analysis of synchronisation in open quantum systems."""

__version__ = "0.1.0"
