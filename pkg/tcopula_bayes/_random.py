from typing import Sequence

import numpy as np

from tcopula_bayes._errors import DomainError

__all__ = ("make_rng",)


def make_rng(seed: int, stream: Sequence[int] = ()) -> np.random.Generator:
    """
    Counter-based generator (Philox) for `seed`. Distinct `stream` keys give
    statistically independent sub-streams of the same seed.
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise DomainError(f"Seed < {seed!r} > must be an integer.")
    if seed < 0:
        raise DomainError(f"Seed < {seed} > must be non-negative.")
    if any(int(key) < 0 for key in stream):
        raise DomainError(f"Stream keys < {tuple(stream)} > must be >= 0.")
    sequence = np.random.SeedSequence(
        int(seed), spawn_key=tuple(int(key) for key in stream)
    )
    return np.random.Generator(np.random.Philox(sequence))
