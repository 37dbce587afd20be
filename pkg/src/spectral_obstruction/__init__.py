"""Numerical verification of two spectral counterexamples.

A perturbed round sphere with a Ricci lower bound whose K-th eigenvalue falls
below the rescaled round sphere's, and a weighted torpedo-cylinder satisfying
CD(1, inf) whose (d+2)-th eigenvalue falls below the Gaussian's.
"""
__version__ = "0.1.0"
