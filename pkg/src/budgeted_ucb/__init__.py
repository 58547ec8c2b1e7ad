"""Budgeted UCB for multi-armed bandits under time-varying cost caps."""

__version__ = "0.1.0"
