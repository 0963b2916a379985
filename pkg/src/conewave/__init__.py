"""Numerical laboratory for ODE-profile blowup of the radial
energy-critical wave equation in similarity coordinates."""

__version__ = "0.1.0"
