"""Weak-supervision data forge and evaluation harness for factual
consistency checking of summaries."""

__version__ = "0.1.0"
