"""
Portable seeded generator shared by fold planning and cohort synthesis.

The stream is xorshift64* (Vigna, 2014) with its 64-bit state initialised by
one round of splitmix64 applied to the user seed, so that seed 0 and small
seeds still give well-mixed states::

    state = splitmix64(seed)            # never zero, see below
    next():
        x ^= x >> 12
        x ^= x << 25   (mod 2**64)
        x ^= x >> 27
        return (x * 0x2545F4914F6CDD1D) mod 2**64

Derived draws:

* ``below(n)``: unbiased integer in ``[0, n)`` by rejection; draws ``r`` until
  ``r < 2**64 - (2**64 mod n)`` and returns ``r mod n``.
* ``random()``: ``(next() >> 11) * 2**-53``, a double in ``[0, 1)``.
* ``shuffle(xs)``: Fisher-Yates from the back; for ``i = len-1 .. 1`` swap
  ``xs[i]`` with ``xs[below(i + 1)]``.

Everything is integer arithmetic, so any language reproduces the same stream.
"""

MASK64 = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        state = splitmix64(seed)
        # xorshift has an all-zero fixed point
        self._state = state if state else 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, xs: list) -> None:
        for i in range(len(xs) - 1, 0, -1):
            j = self.below(i + 1)
            xs[i], xs[j] = xs[j], xs[i]
