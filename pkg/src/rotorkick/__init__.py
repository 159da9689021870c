"""Quantum dynamics of a polar polarizable rigid rotor driven by unipolar pulses."""

__version__ = "0.1.0"
