"""Minimal bounded-box space, API-compatible with the common RL toolkits."""

from __future__ import annotations

import numpy as np


class Box:
    """Axis-aligned box of float64 vectors with inclusive bounds."""

    def __init__(self, low, high, dtype=np.float64, seed: int | None = None):
        self.dtype = np.dtype(dtype)
        self.low = np.asarray(low, dtype=self.dtype)
        self.high = np.asarray(high, dtype=self.dtype)
        if self.low.shape != self.high.shape:
            raise ValueError("low and high must share a shape")
        if np.any(self.low >= self.high):
            raise ValueError("low must be strictly below high")
        self.shape = self.low.shape
        self._rng = np.random.default_rng(seed)

    def seed(self, seed: int | None) -> None:
        self._rng = np.random.default_rng(seed)

    def sample(self) -> np.ndarray:
        return self._rng.uniform(self.low, self.high).astype(self.dtype)

    def contains(self, x) -> bool:
        arr = np.asarray(x)
        return (
            arr.shape == self.shape
            and bool(np.all(np.isfinite(arr)))
            and bool(np.all(arr >= self.low))
            and bool(np.all(arr <= self.high))
        )

    def __repr__(self) -> str:
        return f"Box(low={self.low!r}, high={self.high!r})"
