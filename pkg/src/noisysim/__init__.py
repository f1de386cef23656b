"""Bit-level simulator for running asynchronous protocols over adversarially
noisy private channels."""

__version__ = "0.1.0"
