"""Counter-based random number streams for reproducible parallel sampling.

Each logical stream is a (key, counter) pair. The generator is the splitmix64
finalizer applied to ``key + (counter+1) * GOLDEN``; values at different
counters are independent, so disjoint streams never interact regardless of
execution order. Keys are derived from the master seed by labeled SHA-256
hashing (see :func:`derive_key`), e.g. ``derive_key(seed, "chain", 2, "ab", 7)``
for the coefficient block of ship 7 in chain 2.

All helpers are numba-compatible and run identically on the pure-numpy path
(wrapping uint64 arithmetic; call through ``_backend.run_kernel`` there).
"""

import hashlib
import math

import numpy as np

from ._backend import maybe_njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_2_NEG53 = 2.0 ** -53


def derive_key(seed: int, *labels) -> np.uint64:
    """Derive a 64-bit stream key from the master seed and a label path."""
    tag = "fleetpower|%d|%s" % (int(seed), "|".join(str(x) for x in labels))
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return np.uint64(int.from_bytes(digest[:8], "little"))


@maybe_njit(cache=True)
def u64_at(key, ctr):
    x = key + (ctr + _ONE) * _GOLDEN
    x = (x ^ (x >> _S30)) * _MIX1
    x = (x ^ (x >> _S27)) * _MIX2
    return x ^ (x >> _S31)


@maybe_njit(cache=True)
def uniform_at(key, ctr):
    # in (0, 1]; never 0 so log() is safe
    return float((u64_at(key, ctr) >> _S11) + _ONE) * _2_NEG53


@maybe_njit(cache=True)
def normal_at(key, ctr):
    # Box-Muller, consumes counters ctr and ctr+1
    u1 = uniform_at(key, ctr)
    u2 = uniform_at(key, ctr + _ONE)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
