"""Pseudospectral solver and rate-verification harness for damped
sigma-evolution equations with modulus-of-continuity nonlinearities."""

__version__ = "0.1.0"
