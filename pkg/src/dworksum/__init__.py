"""Twisted exponential sums over finite fields, two independent ways.

The package evaluates the character sums S_m attached to an integer exponent
matrix A and twist exponents gamma both by brute force over the torus and
through the trace of a truncated completely-continuous operator acting on a
weighted monomial space; it assembles L-functions from either route, checks
them against each other to certified p-adic precision, and emits the
hypergeometric differential system attached to (A, gamma).
"""

__version__ = "0.1.0"
