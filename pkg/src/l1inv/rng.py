"""Deterministic random numbers for reproducible problem instances.

All randomness in the package (noise vectors, planted supports, power
iteration starts, random orthogonal factors) is drawn from a single
SplitMix64 generator so that a benchmark config plus a 64-bit seed pins
down every generated number.  The generator is small enough to re-derive
in any language:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9   mod 2^64
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB   mod 2^64
    output: z XOR (z >> 31)

Uniform doubles take the top 53 bits; Gaussians use the Box-Muller
transform on consecutive uniform pairs.
"""

import math

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """64-bit SplitMix generator with uniform/Gaussian output helpers."""

    def __init__(self, seed):
        self._state = int(seed) & _MASK
        self._spare_normal = None

    def next_uint64(self):
        self._state = (self._state + _GOLDEN) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def uniform(self):
        """Uniform double in [0, 1) using the top 53 bits."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def normal(self):
        """Standard Gaussian via Box-Muller on uniform pairs."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        # u1 must avoid 0 for the logarithm; shift into (0, 1].
        u1 = ((self.next_uint64() >> 11) + 1) * 2.0**-53
        u2 = self.uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = radius * math.sin(theta)
        return radius * math.cos(theta)

    def normals(self, count):
        return [self.normal() for _ in range(count)]

    def below(self, bound):
        """Uniform integer in [0, bound) without modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_uint64()
            if value < limit:
                return value % bound

    def sample_indices(self, count, total):
        """Draw `count` distinct indices from range(total), sorted.

        Partial Fisher-Yates on an explicit index table, so the result
        depends only on the stream position.
        """
        if not 0 <= count <= total:
            raise ValueError("need 0 <= count <= total")
        pool = list(range(total))
        for i in range(count):
            j = i + self.below(total - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:count])
