"""Counter-based Philox4x32-10 generator usable inside numba kernels.

Every random draw is a pure function of ``(seed, path, counter)``, so a
path's stream does not depend on how paths are scheduled across threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["philox4x32", "uniform_pair", "uniform_triple", "split_seed", "PhiloxStream"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S5 = np.uint64(5)
_S6 = np.uint64(6)
_TWO_M53 = 2.0 ** -53
_TWO_M32 = 2.0 ** -32


@njit(cache=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds on a 4x32-bit counter with a 2x32-bit key."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0, c1, c2, c3 = (hi1 ^ c1 ^ k0) & _MASK, lo1, (hi0 ^ c3 ^ k1) & _MASK, lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@njit(cache=True)
def _to_unit(a, b):
    # 53 random bits, offset by half an ulp so the result lies in (0, 1)
    return ((a >> _S5) * 67108864.0 + (b >> _S6) + 0.5) * _TWO_M53


@njit(cache=True)
def uniform_triple(counter, path, k0, k1):
    """One 53-bit and two 32-bit uniforms on ``(0, 1)`` from a single block."""
    c = np.uint64(counter)
    p = np.uint64(path)
    r0, r1, r2, r3 = philox4x32(c & _MASK, c >> _S32, p & _MASK, p >> _S32, k0, k1)
    return _to_unit(r0, r1), (r2 + 0.5) * _TWO_M32, (r3 + 0.5) * _TWO_M32


@njit(cache=True)
def uniform_pair(counter, path, k0, k1):
    """Two independent uniforms on ``(0, 1)`` for block ``counter`` of stream ``path``."""
    c = np.uint64(counter)
    p = np.uint64(path)
    r0, r1, r2, r3 = philox4x32(c & _MASK, c >> _S32, p & _MASK, p >> _S32, k0, k1)
    return _to_unit(r0, r1), _to_unit(r2, r3)


def split_seed(seed: int) -> tuple[np.uint64, np.uint64]:
    """Split a 64-bit seed into the two key words."""
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned value")
    return np.uint64(seed & 0xFFFFFFFF), np.uint64(seed >> 32)


class PhiloxStream:
    """Sequential uniforms from one ``(seed, path)`` stream, for Python callers."""

    def __init__(self, seed: int, path: int = 0):
        self.k0, self.k1 = split_seed(seed)
        self.path = int(path)
        self.counter = 0

    def random(self, size: int | None = None):
        n = 1 if size is None else int(size)
        out = np.empty(n + (n % 2))
        for i in range(0, len(out), 2):
            out[i], out[i + 1] = uniform_pair(self.counter, self.path, self.k0, self.k1)
            self.counter += 1
        out = out[:n]
        return float(out[0]) if size is None else out
