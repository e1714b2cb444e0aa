"""Axis-aligned boxes used for control constraints and sampling regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Box:
    """Closed axis-aligned box ``[lower_1, upper_1] x ... x [lower_d, upper_d]``.

    Raises ``ValueError`` unless ``lower < upper`` holds in every coordinate.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError(
                f"box bounds must be 1-D vectors of equal length, got shapes "
                f"{lower.shape} and {upper.shape}"
            )
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("box bounds must be finite")
        if np.any(lower >= upper):
            bad = int(np.argmax(lower >= upper))
            raise ValueError(
                f"degenerate box: lower[{bad}]={lower[bad]!r} >= upper[{bad}]={upper[bad]!r}"
            )
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, point) -> bool:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.shape[-1] != self.dim:
            return False
        return bool(np.all((p >= self.lower) & (p <= self.upper)))

    def clamp(self, point) -> np.ndarray:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.shape[-1] != self.dim:
            raise ValueError(f"point has dimension {p.shape[-1]}, box has {self.dim}")
        return np.minimum(np.maximum(p, self.lower), self.upper)

    def grid(self, counts) -> np.ndarray:
        """Uniform tensor grid with ``counts[d]`` points per axis, endpoints included.

        A count of 1 places the single point at the axis midpoint. Rows are
        ordered with the first coordinate varying slowest.
        """
        counts = [int(c) for c in np.atleast_1d(counts)]
        if len(counts) != self.dim:
            raise ValueError(f"need {self.dim} grid counts, got {len(counts)}")
        if any(c < 1 for c in counts):
            raise ValueError(f"grid counts must be >= 1, got {counts}")
        axes = [
            np.linspace(lo, hi, c) if c > 1 else np.array([0.5 * (lo + hi)])
            for lo, hi, c in zip(self.lower, self.upper, counts)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def __repr__(self):
        return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"
