"""Points of R^n in split coordinates ``(t, x)``.

The first coordinate ``t`` is the distinguished axis; ``x`` is the transverse
block of length ``n - 1`` and ``rho = |x|``.  Batched code works on arrays of
shape ``(N, n)`` whose column 0 holds ``t``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation


@dataclass(frozen=True)
class PointN:
    t: float
    x: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", tuple(float(v) for v in np.ravel(self.x)))
        if len(self.x) < 1:
            raise ValueError("transverse block must have length n - 1 >= 1")

    @property
    def n(self) -> int:
        return len(self.x) + 1

    @property
    def rho(self) -> float:
        return float(np.hypot.reduce(self.x)) if len(self.x) > 1 else abs(self.x[0])

    def as_array(self) -> np.ndarray:
        return np.array((self.t,) + self.x)

    @classmethod
    def from_array(cls, a) -> "PointN":
        a = np.asarray(a, dtype=float).ravel()
        if a.size < 2:
            raise ValueError("a point needs n >= 2 coordinates")
        return cls(a[0], tuple(a[1:]))

    @classmethod
    def axial(cls, t: float, rho: float, n: int) -> "PointN":
        """The point ``(t, rho * e_1)``."""
        x = np.zeros(n - 1)
        x[0] = rho
        return cls(t, tuple(x))


def as_points(p, n: int | None = None) -> np.ndarray:
    """Coerce a PointN, a sequence of PointN or an array into shape ``(N, n)``."""
    if isinstance(p, PointN):
        arr = p.as_array()[None, :]
    elif isinstance(p, (list, tuple)) and p and isinstance(p[0], PointN):
        arr = np.array([q.as_array() for q in p])
    else:
        arr = np.atleast_2d(np.asarray(p, dtype=float))
    if arr.shape[1] < 2:
        raise ValueError("points need n >= 2 coordinates")
    if n is not None and arr.shape[1] != n:
        raise DomainViolation(f"expected dimension {n}, got {arr.shape[1]}")
    return arr


def is_single(p) -> bool:
    """True for a lone point (PointN or flat coordinate vector), False for batches."""
    if isinstance(p, PointN):
        return True
    if isinstance(p, (list, tuple)) and p and isinstance(p[0], PointN):
        return False
    return np.ndim(p) == 1


def split(P: np.ndarray):
    """Return ``(t, X, rho)`` for a batch of points."""
    t = P[:, 0]
    X = P[:, 1:]
    rho = np.sqrt(np.einsum("ij,ij->i", X, X))
    return t, X, rho


def axial_points(t, rho, n: int) -> np.ndarray:
    """Batch of points ``(t, rho * e_1)``; transverse angles are never sampled."""
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    P = np.zeros(t.shape + (n,))
    P[..., 0] = t
    P[..., 1] = rho
    return P.reshape(-1, n)


def random_directions(rng: np.random.Generator, m: int, k: int) -> np.ndarray:
    """``m`` uniformly distributed unit vectors in R^k."""
    if k == 1:
        return rng.choice([-1.0, 1.0], size=(m, 1))
    v = rng.standard_normal((m, k))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
