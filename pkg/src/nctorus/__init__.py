"""Symbolic and numeric reproduction of the scalar curvature of the
noncommutative two-torus with a complex structure and a Weyl factor."""

__version__ = "0.1.0"
