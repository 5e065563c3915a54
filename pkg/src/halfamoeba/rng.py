"""Counter-based splitmix64 streams for reproducible sampling.

Every random draw is a pure function of ``(master_seed, index, attempt, k)``:

    h     = fmix(fmix(master_seed) ^ index)
    h     = fmix(h ^ ((attempt + 1) * GAMMA))
    out_k = fmix(h + (k + 1) * GAMMA)          # k-th draw of the stream

where ``fmix`` is the splitmix64 output finalizer and ``GAMMA`` the golden
ratio increment 0x9E3779B97F4A7C15.  With ``h`` replaced by a raw seed the
last line is the classic splitmix64 generator, so ``splitmix64(0)`` yields
0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F, ...

Uniform doubles take the top 53 bits: ``(out >> 11) * 2**-53``.
Because draws never depend on evaluation order, results are identical for
any chunking or worker count.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def fmix(z):
    """splitmix64 finalizer, elementwise on uint64 arrays."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _C1
        z = (z ^ (z >> np.uint64(27))) * _C2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of the plain splitmix64 generator."""
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(seed & _MASK64) + k * GAMMA
    return fmix(state)


def stream_keys(master_seed: int, index, attempt=0) -> np.ndarray:
    """Per-sample stream key for ``(master_seed, index, attempt)``."""
    index = np.asarray(index, dtype=np.uint64)
    attempt = np.asarray(attempt, dtype=np.uint64)
    m = fmix(np.uint64(master_seed & _MASK64))
    with np.errstate(over="ignore"):
        h = fmix(m ^ index)
        h = fmix(h ^ ((attempt + np.uint64(1)) * GAMMA))
    return h


def uniforms(keys, count: int) -> np.ndarray:
    """``count`` uniform doubles in [0, 1) per key; shape ``keys.shape + (count,)``."""
    keys = np.asarray(keys, dtype=np.uint64)
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = keys[..., None] + k * GAMMA
    bits = fmix(state) >> np.uint64(11)
    return bits.astype(np.float64) * 2.0**-53


def sample_uniforms(master_seed: int, index, count: int, attempt=0) -> np.ndarray:
    return uniforms(stream_keys(master_seed, index, attempt), count)


def derive_seed(master_seed: int, index: int, attempt: int = 0) -> int:
    """A plain Python int seed for a sub-computation (e.g. a solver call)."""
    return int(stream_keys(master_seed, np.uint64(index), np.uint64(attempt)))
