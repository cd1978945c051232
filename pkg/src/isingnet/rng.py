"""Per-trial counter-based random streams.

Every trial owns two Philox streams keyed by ``(seed, trial, purpose)``:
one for the initial configuration, one for the Brownian increments. A
trial's numbers therefore do not depend on which other trials share its
batch or worker, and the noise consumed at step ``k`` is always the
``k``-th block of that trial's stream.
"""

from __future__ import annotations

import numpy as np

_INIT, _NOISE = 0, 1

# Upper bound on the size (in doubles) of one pre-drawn noise block.
BLOCK_BUDGET = 1 << 20


def trial_generator(seed: int, trial: int, purpose: int = _NOISE) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), int(trial), int(purpose)])
    return np.random.Generator(np.random.Philox(ss))


def initial_spins(seed: int, trials, n: int) -> np.ndarray:
    """I.i.d. uniform +-1 initial states, shape ``(len(trials), n)``."""
    rows = [trial_generator(seed, t, _INIT).integers(0, 2, size=n) for t in trials]
    return (2.0 * np.stack(rows) - 1.0) if rows else np.empty((0, n))


class NoiseStream:
    """Standard normal increments for a batch of trials.

    Draws are buffered as ``(trials, block, n)`` arrays; trial ``j``'s row is
    the next ``block * n`` numbers of its own stream, so the block size never
    changes the values.
    """

    def __init__(self, seed: int, trials, n: int, block: int | None = None):
        self.trials = list(trials)
        self.n = n
        self._gens = [trial_generator(seed, t) for t in self.trials]
        width = max(1, n * max(1, len(self.trials)))
        self.block = block or max(1, min(4096, BLOCK_BUDGET // width))
        self._buf = np.empty((len(self.trials), self.block, n))
        self._pos = self.block
        self.step = 0

    def _refill(self):
        for j, g in enumerate(self._gens):
            g.standard_normal(out=self._buf[j])
        self._pos = 0

    def take(self, k: int) -> tuple[np.ndarray, int, int]:
        """Up to ``k`` steps of noise as ``(buffer, offset, count)``; consumes them."""
        if self._pos >= self.block:
            self._refill()
        off = self._pos
        cnt = min(k, self.block - off)
        self._pos += cnt
        self.step += cnt
        return self._buf, off, cnt

    def next(self) -> np.ndarray:
        """Noise of the next step, shape ``(trials, n)``."""
        buf, off, _ = self.take(1)
        return buf[:, off, :]
