"""Desk-scale workbench for group actions on hyperbolic spaces and their products."""
from __future__ import annotations

__version__ = "0.1.0"
