"""Axis-aligned box search domains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Box"]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower_i, upper_i]`` per coordinate."""

    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def cube(cls, dimension: int, lower: float = -5.0, upper: float = 5.0) -> "Box":
        return cls(np.full(dimension, float(lower)), np.full(dimension, float(upper)))

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def diameter(self) -> float:
        """Length of the longest diagonal."""
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def sample_uniform(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        """Draw one point (n is None) or an (n, D) array of uniform points."""
        size = self.dimension if n is None else (n, self.dimension)
        return rng.uniform(self.lower, self.upper, size=size)
