"""Counter-based random streams for reproducible parallel Monte Carlo.

Every replica draws from its own splitmix64 stream whose starting counter
is a hash of (seed, replica index).  Output k of a stream is a pure
function of (seed, replica, k), so replicas can run in any order, or
concurrently, and still produce bitwise-identical results.

This module is the pure-Python reference; the simulation kernels inline
the same arithmetic under numba and are tested against it.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """The splitmix64 finalizer: a 64-bit bijective hash."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_state(seed: int, replica: int) -> int:
    """Starting counter of the stream keyed by (seed, replica)."""
    z = mix64((seed + GOLDEN * replica) & MASK64)
    return (z + GOLDEN * (replica + 1)) & MASK64


def next_u64(state: int) -> tuple[int, int]:
    """One draw: returns (value, advanced state)."""
    state = (state + GOLDEN) & MASK64
    return mix64(state), state


def next_unit(state: int) -> tuple[float, int]:
    """Uniform double in [0, 1) from the top 53 bits of one draw."""
    z, state = next_u64(state)
    return (z >> 11) * (1.0 / 9007199254740992.0), state


class Stream:
    """Stateful convenience wrapper over one (seed, replica) stream."""

    def __init__(self, seed: int, replica: int = 0):
        self._state = stream_state(seed, replica)
        self.draws = 0

    def u64(self) -> int:
        z, self._state = next_u64(self._state)
        self.draws += 1
        return z

    def unit(self) -> float:
        return (self.u64() >> 11) * (1.0 / 9007199254740992.0)
