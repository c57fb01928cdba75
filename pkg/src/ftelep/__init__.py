"""Fermionic teleportation under the parity superselection rule."""

__version__ = "0.1.0"
