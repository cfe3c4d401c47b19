"""Seeded, platform-independent random streams.

Only the raw 64-bit output of numpy's PCG64 bit generator is used; that
stream is fixed by the PCG64 algorithm itself. The conversion to floats
(53-bit mantissa) and to Gaussians (Box-Muller) is done here so results do
not depend on numpy's distribution code, which may change between
releases.
"""

import numpy as np

_TWO_POW_M53 = 1.0 / 9007199254740992.0


def uniform01(seed, n, offset=0):
    """Return ``n`` doubles in [0, 1) from stream ``seed`` starting at draw ``offset``."""
    bitgen = np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    if offset:
        bitgen.advance(int(offset))
    raw = bitgen.random_raw(int(n))
    return (raw >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53


def uniform(seed, shape, low, high, offset=0):
    n = int(np.prod(shape))
    u = uniform01(seed, n, offset)
    return (low + (high - low) * u).reshape(shape)


def gaussian_pairs(seed, n_pairs, offset=0):
    """Standard normal pairs via Box-Muller; consumes two raw draws per pair.

    Returns an array of shape (n_pairs, 2). ``offset`` counts pairs.
    """
    u = uniform01(seed, 2 * n_pairs, 2 * offset).reshape(n_pairs, 2)
    # 1 - u lies in (0, 1], keeping the log finite
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
