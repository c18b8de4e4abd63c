"""Constraint-guided planning for Risk troop placement and multi-step arithmetic."""

__version__ = "0.1.0"
