"""Agent-based simulation of airborne exposure among Black Friday shoppers."""

__version__ = "0.1.0"
