"""Deterministic 64-bit random streams (SplitMix64).

The generator is SplitMix64: state advances by the golden-ratio increment
0x9E3779B97F4A7C15 and each output is finalized with the murmur-style mix

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Per-sample substreams are derived from a master seed and a sample index by
``derive_stream(master, index)``, which seeds a fresh generator with
``mix64(master XOR mix64((index + 1) * GAMMA))``.  Identical (seed, index)
pairs always yield identical streams, so ensembles are reproducible and can
be partitioned across workers.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Minimal deterministic generator with a documented algorithm."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_uint64(self) -> int:
        self._state = (self._state + GAMMA) & _MASK
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * 2.0 ** -53

    def choice_index(self, weights: list[float]) -> int:
        """Index sampled proportionally to nonnegative weights."""
        total = sum(weights)
        if total <= 0.0:
            raise ValueError("weights must have positive sum")
        u = self.random() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                return i
        return len(weights) - 1


def derive_stream(master_seed: int, index: int) -> SplitMix64:
    """Independent substream for one sample of an ensemble."""
    if index < 0:
        raise ValueError("sample index must be nonnegative")
    return SplitMix64(mix64((master_seed & _MASK) ^ mix64(((index + 1) * GAMMA) & _MASK)))
