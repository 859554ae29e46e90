"""Seeded randomness helpers - every random choice in the toolkit goes through here"""

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_seed(seed: int, *labels: int) -> int:
    """
    Derive an independent child seed from a parent seed and integer labels

    Used to give instance i of a sweep its own stream so that sweeps are
    reproducible regardless of how many instances run before it.
    """
    sequence = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *[int(x) for x in labels]])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
