"""Elementary nonsmooth primitives.

Saturation, single-valued signum, projection onto a symmetric box, and the
closed-form proximal map of ``a*||x|| + (b/2)*||x||^2``.  Everything here is
closed form and pure; the set-valued selections of the controllers are always
computed through these maps rather than by evaluating a multivalued sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BoxConstraint",
    "NormQuadWeights",
    "sat",
    "sign0",
    "project_box",
    "prox_norm_quad",
    "variational_residual",
]


def sat(z: float) -> float:
    """Unit saturation: z inside [-1, 1], clipped to +-1 outside."""
    if z > 1.0:
        return 1.0
    if z < -1.0:
        return -1.0
    return float(z)


def sign0(z: float) -> float:
    """Single-valued signum, with sign0(0) = 0."""
    if z > 0.0:
        return 1.0
    if z < 0.0:
        return -1.0
    return 0.0


@dataclass(frozen=True)
class BoxConstraint:
    """Per-joint symmetric actuation bound: admissible set is [-limits_i, +limits_i]."""

    limits: np.ndarray

    def __post_init__(self) -> None:
        lim = np.atleast_1d(np.asarray(self.limits, dtype=float))
        if lim.ndim != 1 or lim.size == 0:
            raise ValueError("limits must be a non-empty 1-D vector")
        if not np.all(lim > 0.0):
            raise ValueError("all box limits must be strictly positive")
        object.__setattr__(self, "limits", lim)

    @property
    def dim(self) -> int:
        return int(self.limits.size)


@dataclass(frozen=True)
class NormQuadWeights:
    """Weights of the penalty a*||x|| + (b/2)*||x||^2 (a, b >= 0)."""

    a: float
    b: float = 0.0

    def __post_init__(self) -> None:
        if self.a < 0.0 or self.b < 0.0:
            raise ValueError("penalty weights must be nonnegative")


def project_box(y: np.ndarray, box: BoxConstraint) -> np.ndarray:
    """Euclidean projection of y onto the box [-F, +F], entrywise clamp."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != box.limits.shape:
        raise ValueError(f"dimension mismatch: y has shape {y.shape}, box has {box.limits.shape}")
    return np.clip(y, -box.limits, box.limits)


def prox_norm_quad(z: np.ndarray, index: float, w: NormQuadWeights) -> np.ndarray:
    """Proximal map of index mu for f(x) = a*||x|| + (b/2)*||x||^2.

    Returns argmin_x  ||x - z||^2 / (2*index) + a*||x|| + (b/2)*||x||^2, which
    is 0 when ||z|| <= index*a (the dead zone of the norm term) and otherwise a
    radial shrinkage of z.
    """
    if index <= 0.0:
        raise ValueError("prox index must be positive")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    nz = float(np.linalg.norm(z))
    if nz <= index * w.a:
        return np.zeros_like(z)
    scale = (nz - index * w.a) / ((1.0 + index * w.b) * nz)
    return scale * z


def variational_residual(
    y_star: np.ndarray,
    y_proj: np.ndarray,
    box: BoxConstraint,
    probes: Iterable[Sequence[float]],
) -> float:
    """Optimality certificate for a claimed projection.

    For probes p inside the unit box, returns

        max_p <y_star - y_proj, p - F^{-1} y_proj>.

    If y_proj really is the box projection of y_star, every term is <= 0 up to
    roundoff; a positive value witnesses a violated variational inequality.
    """
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    y_proj = np.atleast_1d(np.asarray(y_proj, dtype=float))
    d = y_star - y_proj
    scaled = y_proj / box.limits
    worst = -np.inf
    for p in probes:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != scaled.shape:
            raise ValueError("probe dimension mismatch")
        if np.any(np.abs(p) > 1.0 + 1e-12):
            raise ValueError("probe lies outside the unit box")
        worst = max(worst, float(d @ (p - scaled)))
    if worst == -np.inf:
        raise ValueError("at least one probe is required")
    return worst
