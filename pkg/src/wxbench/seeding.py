"""Deterministic seed fan-out: one master seed, stable per-component seeds.

A splitmix64 step is applied to the master seed mixed with an FNV-1a hash
of the component label, so seeds are stable across platforms and runs and
insensitive to the order components are created in.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def _splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _fnv1a(text):
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return h


def derive_seed(master, label):
    """Stable 63-bit seed for the component named ``label``."""
    return _splitmix64((master & _MASK) ^ _fnv1a(label)) & ((1 << 63) - 1)
