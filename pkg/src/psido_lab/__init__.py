"""Numerical laboratory for exotic pseudo-differential and Fourier integral operators."""

from ._backend import NAME as BACKEND

__version__ = "0.1.0"
