"""String topology operations on spheres, with the matching Morse-Bott and geodesic numerics."""

__version__ = "0.1.0"
