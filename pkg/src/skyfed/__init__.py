"""Desk-scale federated astronomy archive toolkit."""

__version__ = "0.1.0"
