"""Computational laboratory for free Banach lattices over finite-dimensional spaces."""

from .estimate import Budget, ConsistencyError, NormEstimate
from .spaces import Space, make_space

__all__ = ["Budget", "ConsistencyError", "NormEstimate", "Space", "make_space"]
