"""Deterministic random streams for instance generation.

The generator is fully specified so independent implementations can
reproduce instances bit for bit:

* Seeding uses the splitmix64 finalizer ``mix64``::

      mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
                z ^= z >> 27; z *= 0x94D049BB133111EB
                z ^= z >> 31                      (all mod 2**64)

* Stream ``(seed, tag, lane)`` has initial state
  ``mix64(seed + GOLDEN*tag + LANE_MULT*lane)`` (mod 2**64), replaced by
  GOLDEN if zero, with ``GOLDEN = 0x9E3779B97F4A7C15`` and
  ``LANE_MULT = 0xD1B54A32D192ED03``.

* Each draw advances the lane's xorshift64* state::

      s ^= s >> 12; s ^= s << 25; s ^= s >> 27    (mod 2**64)
      out = s * 0x2545F4914F6CDD1D                (mod 2**64)

* A uniform double in [0, 1) is ``(out >> 11) * 2**-53``.

Every lane owns an independent stream, so redrawing one lane never
shifts the values another lane sees.
"""

from __future__ import annotations

import numpy as np

__all__ = ["mix64", "stream_seed", "LaneStreams", "GOLDEN"]

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
LANE_MULT = 0xD1B54A32D192ED03
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_OUT_MULT = 0x2545F4914F6CDD1D
_INV53 = 2.0 ** -53


def mix64(z: int) -> int:
    """splitmix64 output finalizer on a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def stream_seed(seed: int, tag: int, lane: int) -> int:
    """Nonzero xorshift64* state for one lane of one tagged stream."""
    s = mix64((seed + GOLDEN * tag + LANE_MULT * lane) & _MASK)
    return s if s else GOLDEN


class LaneStreams:
    """A bank of independent xorshift64* lanes advanced in lockstep."""

    def __init__(self, seed: int, tag: int, n_lanes: int):
        lanes = np.arange(n_lanes, dtype=np.uint64)
        base = np.uint64((seed + GOLDEN * tag) & _MASK)
        s = base + np.uint64(LANE_MULT) * lanes
        s = (s ^ (s >> np.uint64(30))) * np.uint64(_MIX1)
        s = (s ^ (s >> np.uint64(27))) * np.uint64(_MIX2)
        s = s ^ (s >> np.uint64(31))
        s[s == 0] = np.uint64(GOLDEN)
        self.state = s

    def uniforms(self, active=None) -> np.ndarray:
        """One uniform [0,1) draw per selected lane (advances only those)."""
        s = self.state if active is None else self.state[active]
        s = s ^ (s >> np.uint64(12))
        s = s ^ (s << np.uint64(25))
        s = s ^ (s >> np.uint64(27))
        if active is None:
            self.state = s
        else:
            self.state[active] = s
        out = s * np.uint64(_OUT_MULT)
        return (out >> np.uint64(11)).astype(np.float64) * _INV53

    def uniform_range(self, lo: float, hi: float, active=None, open_low: bool = False) -> np.ndarray:
        """Uniforms in [lo, hi) or, with ``open_low``, in (lo, hi]."""
        u = self.uniforms(active)
        if open_low:
            return hi - (hi - lo) * u
        return lo + (hi - lo) * u
