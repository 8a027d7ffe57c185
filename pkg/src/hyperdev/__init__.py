"""Hypergraph homomorphism deviations: bases and dual norms, decompositions,
counting, entropic variational problems and tail estimation.

Submodules are imported on demand, e.g. ``from hyperdev.hypergraph import delta_prime``.
"""

__version__ = "0.1.0"
