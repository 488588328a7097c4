"""Discrete-event simulation and coupled replay for redundant-request queues."""

__version__ = "0.1.0"
