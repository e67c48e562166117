"""Phase-space quasi-probabilities, truncated cumulant densities and
two-fermion entanglement for lesser Green functions."""
from . import cumulant, fermion, greenfn, numerics, wigner

__version__ = "0.1.0"

__all__ = ["numerics", "wigner", "cumulant", "fermion", "greenfn", "__version__"]
