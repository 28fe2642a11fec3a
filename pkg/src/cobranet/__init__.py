"""Biased two-sample opinion dynamics on directed configuration-model graphs."""

__version__ = "0.1.0"
