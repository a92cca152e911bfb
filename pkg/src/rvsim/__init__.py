"""Cycle-level multi-core RV32I design space exploration simulator."""

__version__ = "0.1.0"
