"""Kernel-conditional binomial confidence intervals with bootstrap bandwidth choice."""

__version__ = "0.1.0"
