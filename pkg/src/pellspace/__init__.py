"""Pellytopes, their normal fans and the binary geometries they carry."""

__version__ = "0.1.0"
