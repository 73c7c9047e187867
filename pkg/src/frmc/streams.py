"""Deterministic, counter-based random streams for Monte Carlo batches.

Every trajectory gets its own Philox stream whose 128-bit key is derived
from (master seed, role string, trajectory index) by SplitMix64 chaining:

    s0  = splitmix64(seed XOR fnv1a64(role))
    s1  = splitmix64(s0 XOR index)
    key = s1 | (splitmix64(s1) << 64)

Gaussian variates are produced by inverse-CDF applied to the canonical
53-bit uniform ((raw >> 11) + 0.5) * 2**-53, so the values depend only on
the Philox raw output, never on the library's normal-sampling algorithm.
This is what makes batches reproducible from (seed, role, index) alone and
bit-identical no matter how work is scheduled.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output step (Steele et al. mixing constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def fnv1a64(text: str) -> int:
    """FNV-1a hash of a role tag; stable across runs unlike builtin hash."""
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def stream_key(seed: int, role: str, index: int) -> int:
    """128-bit Philox key for one (seed, role, index) stream."""
    s0 = splitmix64((seed & _MASK64) ^ fnv1a64(role))
    s1 = splitmix64(s0 ^ (index & _MASK64))
    s2 = splitmix64(s1)
    return s1 | (s2 << 64)


def derive_seed(seed: int, role: str, index: int) -> int:
    """64-bit sub-seed (e.g. one per study replication)."""
    return stream_key(seed, role, index) & _MASK64


def raw_uniforms(seed: int, role: str, index: int, count: int) -> np.ndarray:
    """`count` uniforms in (0, 1), from the stream's raw 64-bit output."""
    bitgen = Philox(key=stream_key(seed, role, index))
    raw = bitgen.random_raw(count)
    return ((raw >> np.uint64(11)) + 0.5) * 2.0**-53


def normals_from_uniforms(u: np.ndarray) -> np.ndarray:
    """Standard normals via the inverse Gaussian CDF."""
    return ndtri(u)


def standard_normals(seed: int, role: str, index: int, shape) -> np.ndarray:
    """Standard-normal array for one trajectory stream."""
    n = int(np.prod(shape)) if shape else 1
    z = normals_from_uniforms(raw_uniforms(seed, role, index, n))
    return z.reshape(shape)
