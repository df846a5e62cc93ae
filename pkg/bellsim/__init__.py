"""Simulation library for two-particle spin correlation experiments.

The package cross-checks three correlation models (exact singlet
statistics, a sign-prescription local hidden variable model and the
anticommuting shared-variable construction) under a common estimation
and CHSH harness and a locality-enforcing event simulator.
"""

__version__ = "0.1.0"
