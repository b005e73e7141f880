"""Semiclassical spectra of one-dimensional Schrodinger operators, checked against direct numerics."""

from ._accel import HAS_NUMBA, backend
from .potential import PotentialModel, builtin, parse_potential

__version__ = "0.1.0"

__all__ = ["HAS_NUMBA", "PotentialModel", "__version__", "backend", "builtin", "parse_potential"]
