"""Numerical laboratory for quantum spin-glass random-matrix ensembles.

Builds the nearest-neighbor chain, spherical, graph and p-spin Hamiltonians
from seeded coefficient draws, computes their empirical spectral measures,
and measures convergence toward the Gaussian (or semicircle) reference law
in W1 and bounded-Lipschitz distance.
"""

__version__ = "0.1.0"
