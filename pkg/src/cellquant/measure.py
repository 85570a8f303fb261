"""KL divergence, centroids, cell distortion and mutual information.

All logarithms are base 2, and ``0 * log 0`` is taken as 0 throughout.
A posterior ``r`` stands for the probability pair ``[r, 1 - r]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cellquant.errors import EmptyCellError
from cellquant.quantizer import Quantizer, cell_labels

__all__ = [
    "binary_entropy",
    "kl_divergence",
    "binary_kl",
    "CellStats",
    "PrefixSums",
    "cell_centroid",
    "cell_distortion",
    "cell_stats",
    "total_distortion",
    "joint_mutual_information",
    "mutual_information_xz",
    "verify_identity",
    "cell_masses",
]


def _xlog2x(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)


def binary_entropy(r):
    """H_b(r) in bits; works elementwise on arrays."""
    r = np.asarray(r, dtype=float)
    out = -_xlog2x(r) - _xlog2x(1.0 - r)
    return float(out) if out.ndim == 0 else out


def kl_divergence(a, b) -> float:
    """D(a || b) in bits for two probability vectors.

    Returns ``math.inf`` when ``a`` puts mass where ``b`` does not.
    """
    total = 0.0
    for ai, bi in zip(a, b):
        ai, bi = float(ai), float(bi)
        if ai <= 0.0:
            continue
        if bi <= 0.0:
            return math.inf
        total += ai * math.log2(ai / bi)
    return max(total, 0.0)


def binary_kl(r, c):
    """Vectorized D([r, 1-r] || [c, 1-c]) in bits."""
    r = np.asarray(r, dtype=float)
    c = np.asarray(c, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(r > 0, r * (np.log2(np.where(r > 0, r, 1.0)) - np.log2(c)), 0.0)
        s = 1.0 - r
        t2 = np.where(s > 0, s * (np.log2(np.where(s > 0, s, 1.0)) - np.log2(1.0 - c)), 0.0)
    out = t1 + t2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CellStats:
    mass: float
    centroid: float
    distortion: float


def _as_cell(r, mass):
    r = np.asarray(r, dtype=float).ravel()
    mass = np.asarray(mass, dtype=float).ravel()
    if r.shape != mass.shape:
        raise ValueError("r and mass must have the same length")
    return r, mass


def cell_centroid(r, mass) -> float:
    """Mass-weighted mean posterior of a cell.

    This is the closed-form minimizer of ``sum(mass * D(v || [c, 1-c]))``.
    """
    r, mass = _as_cell(r, mass)
    w = float(mass.sum())
    if w <= 0:
        raise EmptyCellError("centroid of a zero-mass cell is undefined")
    return min(max(float(np.dot(mass, r)) / w, 0.0), 1.0)


def cell_distortion(r, mass) -> float:
    """Mass-weighted KL divergence of a cell's posteriors to its centroid."""
    r, mass = _as_cell(r, mass)
    if r.size == 0 or mass.sum() <= 0:
        return 0.0
    c = cell_centroid(r, mass)
    return max(float(np.dot(mass, binary_kl(r, c))), 0.0)


def cell_stats(r, mass) -> CellStats:
    r, mass = _as_cell(r, mass)
    w = float(mass.sum())
    if w <= 0:
        return CellStats(mass=0.0, centroid=math.nan, distortion=0.0)
    return CellStats(mass=w, centroid=cell_centroid(r, mass), distortion=cell_distortion(r, mass))


@dataclass(frozen=True, eq=False)
class PrefixSums:
    """Cumulative sums over an r-sorted grid for O(1) interval queries.

    Arrays have length ``M + 1`` with a leading zero, so the interval of
    atoms ``[i, j)`` has mass ``s0[j] - s0[i]``.
    """

    s0: np.ndarray
    s1: np.ndarray
    sh: np.ndarray

    @classmethod
    def from_grid(cls, grid) -> "PrefixSums":
        zero = np.zeros(1)
        s0 = np.concatenate([zero, np.cumsum(grid.mass)])
        s1 = np.concatenate([zero, np.cumsum(grid.mass * grid.r)])
        sh = np.concatenate([zero, np.cumsum(grid.mass * binary_entropy(grid.r))])
        for a in (s0, s1, sh):
            a.flags.writeable = False
        return cls(s0=s0, s1=s1, sh=sh)

    @property
    def size(self) -> int:
        return self.s0.size - 1

    def mass(self, i, j):
        return self.s0[j] - self.s0[i]

    def distortion(self, i, j):
        """Interval distortion ``W * H_b(c) - sum(mass * H_b(r))``, clamped at 0.

        Accepts integer arrays for ``i`` and ``j``.
        """
        w = self.s0[j] - self.s0[i]
        x = self.s1[j] - self.s1[i]
        h = self.sh[j] - self.sh[i]
        w_arr = np.asarray(w, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.clip(np.where(w_arr > 0, x / np.where(w_arr > 0, w_arr, 1.0), 0.0), 0.0, 1.0)
        d = np.where(w_arr > 0, np.maximum(w_arr * binary_entropy(c) - h, 0.0), 0.0)
        return float(d) if d.ndim == 0 else d


def cell_masses(grid, q: Quantizer) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell joint masses ``(P(x1, z_i), P(x2, z_i))``."""
    labels, n = cell_labels(grid, q)
    a = np.bincount(labels, weights=grid.mass * grid.r, minlength=n)
    b = np.bincount(labels, weights=grid.mass * (1.0 - grid.r), minlength=n)
    return a, b


def total_distortion(grid, q: Quantizer) -> float:
    """Sum over cells of the mass-weighted KL divergence to the centroid."""
    labels, n = cell_labels(grid, q)
    w = np.bincount(labels, weights=grid.mass, minlength=n)
    x = np.bincount(labels, weights=grid.mass * grid.r, minlength=n)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(w > 0, x / np.where(w > 0, w, 1.0), 0.5)
    c = np.clip(c, 0.0, 1.0)
    return max(float(np.dot(grid.mass, binary_kl(grid.r, c[labels]))), 0.0)


def joint_mutual_information(p1z, p2z) -> float:
    """I(X;Z) in bits from the two rows of a 2-by-K joint distribution."""
    p1z = np.asarray(p1z, dtype=float)
    p2z = np.asarray(p2z, dtype=float)
    pz = p1z + p2z
    px1 = p1z.sum()
    px2 = p2z.sum()
    # scaling by the grand total makes a single cell contribute exactly log2(1)
    t = px1 + px2
    total = 0.0
    for row, px in ((p1z, px1), (p2z, px2)):
        nz = row > 0
        total += float(np.sum(row[nz] * np.log2(row[nz] * t / (px * pz[nz]))))
    return max(total, 0.0)


def mutual_information_xz(grid, q: Quantizer) -> float:
    """I(X;Z) in bits for quantizer ``q`` applied to ``grid``.

    The input marginal is the one induced by the grid, so that
    ``I(X;Z) <= I(X;Y)`` holds exactly for the discretized channel.
    """
    a, b = cell_masses(grid, q)
    return joint_mutual_information(a, b)


def verify_identity(grid, q: Quantizer) -> float:
    """``|D(Q) - (I(X;Y) - I(X;Z))|``; zero in exact arithmetic."""
    return abs(total_distortion(grid, q) - (grid.mutual_information() - mutual_information_xz(grid, q)))
