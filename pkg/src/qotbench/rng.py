"""Deterministic random substreams.

All randomness goes through numpy's Philox4x64 counter-based bit
generator.  A substream is addressed by ``(seed, stream, index)``, so
sample 17 of a study draws the same numbers whether or not samples 0..16
were generated first, and regardless of worker count.
"""

from __future__ import annotations

import numpy as np

ALGORITHM = "numpy.random.Philox(4x64, SeedSequence)"

STREAMS = {"sample": 1, "request": 2, "repeat": 3, "misc": 9}


def substream(seed: int, stream: str, index: int = 0) -> np.random.Generator:
    key = (STREAMS[stream], int(index))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))
