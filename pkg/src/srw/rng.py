"""Counter-based random streams.

Every stream is a Philox generator keyed by (seed, path). Identical keys
reproduce identical draw sequences; distinct paths give statistically
independent streams, which is what makes replication fan-out deterministic
regardless of how work is scheduled across processes.
"""

from __future__ import annotations

import numpy as np

_BUF = 8192


class RngStream:
    """A seeded, forkable random stream with a buffered scalar fast path."""

    __slots__ = ("seed", "path", "gen", "_buf", "_pos")

    def __init__(self, seed: int, stream_id: int = 0, _path: tuple[int, ...] | None = None):
        self.seed = int(seed)
        self.path = _path if _path is not None else (int(stream_id),)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self.gen = np.random.Generator(np.random.Philox(ss))
        self._buf = np.empty(0)
        self._pos = 0

    @property
    def stream_id(self) -> int:
        return self.path[0]

    def child(self, k: int) -> "RngStream":
        """Derive an independent stream addressed by appending k to the path."""
        return RngStream(self.seed, _path=self.path + (int(k),))

    def clone(self) -> "RngStream":
        """Snapshot the stream: the clone continues exactly like the original."""
        other = RngStream(self.seed, _path=self.path)
        other.gen.bit_generator.state = self.gen.bit_generator.state
        other._buf = self._buf.copy()
        other._pos = self._pos
        return other

    # scalar fast path -----------------------------------------------------

    def u(self) -> float:
        """One uniform draw from [0, 1), served from an internal block."""
        if self._pos >= self._buf.size:
            self._buf = self.gen.random(_BUF)
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return float(v)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.u()

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"
