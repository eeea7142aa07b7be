"""Dense vectors, simplex weights and weighted point configurations.

A point is a plain 1-D float64 ndarray; a configuration bundles n points
(rows of an (n, d) array) with nonnegative weights summing to one.  The
two derived quantities that everything downstream consumes are the convex
combination sum_i w_i x_i and the pair spread

    S = sum_{i<j} w_i w_j ||x_i - x_j||^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TypeAlias

import numpy as np
from numpy.typing import NDArray

Vector: TypeAlias = NDArray[np.float64]
Matrix: TypeAlias = NDArray[np.float64]

# weight sums further off than this are treated as caller bugs, closer
# deviations as I/O rounding and silently renormalized
WEIGHT_SUM_SLACK = 1e-9


def as_point(x) -> Vector:
    """Coerce to a finite 1-D float64 array of dimension >= 1."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1)
    if a.ndim != 1 or a.size < 1:
        raise ValueError(f"point must be a 1-D vector, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("point has non-finite coordinates")
    return a


def inner(a: Vector, b: Vector) -> float:
    """Euclidean inner product <a, b>."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(a @ b)


def norm2(a: Vector) -> float:
    """Euclidean norm ||a||."""
    a = np.asarray(a, dtype=np.float64)
    return float(np.sqrt(a @ a))


@dataclass(frozen=True)
class SimplexWeights:
    """Nonnegative weights on the probability simplex.

    Constructors renormalize when the sum is within WEIGHT_SUM_SLACK of 1
    and reject larger deviations.
    """

    weights: Vector

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-D vector")
        if not np.isfinite(w).all():
            raise ValueError("weights must be finite")
        if (w < 0.0).any():
            raise ValueError("weights must be nonnegative")
        s = float(w.sum())
        if abs(s - 1.0) > WEIGHT_SUM_SLACK:
            raise ValueError(f"weights sum to {s!r}, not 1")
        if s != 1.0:
            w = w / s
        w = w.copy() if w is self.weights else w
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class Configuration:
    """n points of equal dimension together with simplex weights."""

    points: Matrix  # (n, d)
    weights: SimplexWeights

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be an (n, d) array, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("points have non-finite coordinates")
        w = self.weights
        if not isinstance(w, SimplexWeights):
            w = SimplexWeights(np.asarray(w, dtype=np.float64))
        if len(w) != pts.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {len(w)} weights")
        pts = pts.copy() if pts is self.points else pts
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def convex_combination(c: Configuration) -> Vector:
    """sum_i w_i x_i."""
    return c.weights.weights @ c.points


def pair_spread(c: Configuration) -> float:
    """S = sum_{i<j} w_i w_j ||x_i - x_j||^2 by the explicit double sum."""
    pts = c.points
    w = c.weights.weights
    if pts.shape[0] == 1:
        return 0.0
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    return 0.5 * float(w @ d2 @ w)
