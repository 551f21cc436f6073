import numpy as np


class ScriptRng:
    """RNG stub: integers() pops scripted bits, everything else delegates.

    Lets tests enumerate a protocol's internal random-bit combinations
    exhaustively while measurement randomness stays genuinely random (or
    deterministic where the physics makes it so).
    """

    def __init__(self, bits, fallback_seed=0):
        self.bits = list(bits)
        self.fallback = np.random.default_rng(fallback_seed)

    def integers(self, low, high=None, size=None):
        if size is None:
            return self._pop()
        return np.array([self._pop() for _ in range(int(size))])

    def _pop(self):
        if self.bits:
            return int(self.bits.pop(0))
        return int(self.fallback.integers(2))

    def random(self):
        return self.fallback.random()

    def choice(self, *args, **kwargs):
        return self.fallback.choice(*args, **kwargs)
