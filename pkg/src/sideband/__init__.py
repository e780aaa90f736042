"""Quantum-noise propagation through passive optical networks at rf
sideband frequencies: network DSL, transfer-matrix engine, closed-form
Mach-Zehnder reference, time-domain Monte-Carlo oracle, and entanglement
verification."""

__version__ = "0.1.0"

from . import dsl, engine, entanglement, montecarlo, mzi, network, scenario  # noqa: F401
