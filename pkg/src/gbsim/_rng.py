"""Deterministic random-stream derivation for parallel sub-ensembles.

Every stochastic operation in this package draws its noise from a
``numpy.random.Generator`` (PCG64) whose ``SeedSequence`` is derived from a
64-bit master seed plus a fixed spawn key ``(purpose, subensemble_index)``.
Sub-ensemble streams are therefore independent and reproducible regardless
of how the sub-ensembles are scheduled.  Gaussian noise is always produced
by ``Generator.standard_normal`` (the ziggurat transform), which is the one
Gaussian transform used project-wide.
"""

from __future__ import annotations

import numpy as np

# Purpose tags keep streams for different noise sources disjoint even when
# the same master seed is reused.
STREAM_INPUT = 0
STREAM_NETWORK = 1
STREAM_HAAR = 2
STREAM_SYNTH = 3


def substream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Return the generator for sub-ensemble ``index`` of a given purpose."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(purpose, index))
    return np.random.Generator(np.random.PCG64(ss))
