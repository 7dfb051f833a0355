"""Trainability experiments for variational compilation under shot noise."""

__version__ = "0.1.0"
