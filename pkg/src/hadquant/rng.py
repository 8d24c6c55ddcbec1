"""Reproducible random streams.

Gaussian draws come from the Box-Muller transform applied to uniforms of a
Philox (counter-based) generator, so a dataset depends only on its seed and
the documented algorithm, not on numpy's internal normal sampler.
"""

import numpy as np


def uniform_stream(seed, *key):
    """Philox stream for ``seed`` and an optional sub-stream key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def box_muller(gen, size):
    """``size`` standard normals from pairs of uniforms."""
    size = int(size)
    m = (size + 1) // 2
    u1 = 1.0 - gen.random(m)  # in (0, 1]
    u2 = gen.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:size]
