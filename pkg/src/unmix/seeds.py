"""Deterministic 64-bit seed derivation for independent RNG streams."""

from __future__ import annotations

_MASK = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def mix64(master: int, *parts: int) -> int:
    """Mix a master seed with integer tags into a fresh 64-bit seed.

    Pure function of its arguments, so (master, tags) -> seed is stable
    across processes and platforms. Used to hand every scene, extractor run
    and noise draw its own independent stream.
    """
    h = _splitmix64(master & _MASK)
    for part in parts:
        h = _splitmix64(h ^ (part & _MASK))
    return h
