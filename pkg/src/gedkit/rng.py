"""Seeded random streams.

Every stochastic component draws from a Philox counter-based generator keyed
by an explicit 64-bit seed. Per-run streams use seed XOR run index so results
do not depend on scheduling.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & MASK64))


def run_seed(seed: int, index: int) -> int:
    return (int(seed) ^ int(index)) & MASK64
