"""Exact jet-space test of spinor determinacy in Maxwell-Dirac electrodynamics."""

__version__ = "0.1.0"
