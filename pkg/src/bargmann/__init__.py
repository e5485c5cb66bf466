"""Numerical laboratory for the centrally extended Galilei group and dynamical mass."""

__version__ = "0.1.0"
