"""Quantum public-key cryptography with Bell-pair keys: a simulation lab."""
__version__ = "0.1.0"
