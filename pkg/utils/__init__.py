"""Utility functions"""

from .disjoint_set import DisjointSet
from .fingerprint import canonical_json, fingerprint
from .rng import derive_seed, make_rng

__all__ = ["DisjointSet", "canonical_json", "fingerprint", "derive_seed", "make_rng"]
