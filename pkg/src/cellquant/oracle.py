"""Brute-force verifiers that do not share code paths with the solvers.

* :func:`brute_force_solve` enumerates every labeling of the atoms.
* :func:`centroid_numeric_argmin` minimizes the cell KL objective by
  golden-section search instead of using the closed form.
* :func:`rearrange_to_convex` turns an arbitrary two-cell quantizer into a
  convex-cell one with the same cell masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cellquant.constraints import SeparableConstraint
from cellquant.errors import DomainError, OracleSizeError
from cellquant.quantizer import ConvexCellQuantizer, GeneralQuantizer

__all__ = [
    "GeneralQuantizer",
    "BruteForceResult",
    "Rearrangement",
    "brute_force_solve",
    "rearrange_to_convex",
    "centroid_numeric_argmin",
    "kl_gap",
    "MAX_LABELINGS",
]

MAX_LABELINGS = 10**7
_CHUNK = 1 << 16
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BruteForceResult:
    quantizer: GeneralQuantizer
    objective: float
    mi_xz: float
    constraint_value: float
    labelings: int


def _joint_mi(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a, b: (K, N) joint masses P(x1, z), P(x2, z) for K labelings
    pz = a + b
    px1 = a.sum(axis=1, keepdims=True)
    px2 = b.sum(axis=1, keepdims=True)
    out = np.zeros(a.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        for row, px in ((a, px1), (b, px2)):
            out += np.where(row > 0, row * np.log2(row / (px * pz)), 0.0).sum(axis=1)
    return out


def brute_force_solve(grid, n_cells: int, beta: float, constraint: SeparableConstraint,
                      max_labelings: int = MAX_LABELINGS) -> BruteForceResult:
    """Maximize ``beta * I(X;Z) - C(p_Z)`` over all ``n_cells ** M`` labelings.

    Raises :class:`OracleSizeError` when the count exceeds ``max_labelings``.
    The first labeling (in base-N counting order) attaining the maximum is
    returned.
    """
    m = grid.size
    n = int(n_cells)
    if n < 1:
        raise DomainError("n_cells must be >= 1")
    total = n**m
    if total > max_labelings:
        raise OracleSizeError(
            f"{n}^{m} = {total} labelings exceeds the oracle limit of {max_labelings}")
    terms = constraint.terms_for(n)
    x1 = grid.mass * grid.r
    x2 = grid.mass * (1.0 - grid.r)
    powers = n ** np.arange(m - 1, -1, -1, dtype=np.int64)

    best_val, best_code, best_mi, best_c = -math.inf, 0, 0.0, 0.0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        labels = (codes[:, None] // powers[None, :]) % n
        a = np.empty((codes.size, n))
        b = np.empty((codes.size, n))
        for k in range(n):
            hit = labels == k
            a[:, k] = hit @ x1
            b[:, k] = hit @ x2
        mi = _joint_mi(a, b)
        w = np.clip(a + b, 0.0, 1.0)
        c_val = np.zeros(codes.size)
        for k, g in enumerate(terms):
            c_val += np.asarray(g(w[:, k]), dtype=float)
        obj = beta * mi - c_val
        i = int(np.argmax(obj))
        if obj[i] > best_val:
            best_val, best_code, best_mi, best_c = float(obj[i]), int(codes[i]), float(mi[i]), float(c_val[i])
    labels = (best_code // powers) % n
    return BruteForceResult(
        quantizer=GeneralQuantizer(labels=labels, n_cells=n),
        objective=best_val,
        mi_xz=best_mi,
        constraint_value=best_c,
        labelings=total,
    )


@dataclass(frozen=True)
class Rearrangement:
    """Outcome of :func:`rearrange_to_convex`.

    ``low_label`` is the original label whose cell became the left (low-r)
    convex cell.  ``exact`` is False when no atom boundary reproduces the
    original cell mass and the nearest boundary was used instead.
    """

    quantizer: ConvexCellQuantizer
    exact: bool
    merged: bool
    low_label: int


def rearrange_to_convex(grid, q: GeneralQuantizer, mass_tol: float = 1e-12) -> Rearrangement:
    """Replace a two-cell labeling by the convex split with the same masses.

    The cell with the smaller centroid keeps its mass but is moved onto the
    leftmost atoms in r-order.  Cells with equal centroids (or an empty
    cell) are merged into a single cell.
    """
    if q.n_cells != 2:
        raise DomainError("rearrangement is defined for two-cell quantizers")
    if q.labels.size != grid.size:
        raise DomainError("label count does not match the grid")
    w = np.bincount(q.labels, weights=grid.mass, minlength=2)
    x = np.bincount(q.labels, weights=grid.mass * grid.r, minlength=2)
    m = grid.size
    if w.min() <= 0:
        return Rearrangement(ConvexCellQuantizer.from_boundaries(grid, (0, m)), True, True, 0)
    c = x / w
    if c[0] == c[1]:
        return Rearrangement(ConvexCellQuantizer.from_boundaries(grid, (0, m)), True, True, 0)
    low = int(np.argmin(c))
    cum = np.concatenate([[0.0], np.cumsum(grid.mass)])
    k = int(np.argmin(np.abs(cum - w[low])))
    exact = abs(cum[k] - w[low]) <= mass_tol
    q_bar = ConvexCellQuantizer.from_boundaries(grid, (0, k, m))
    return Rearrangement(q_bar, bool(exact), False, low)


def _cell_kl(c: float, r: np.ndarray, mass: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(r > 0, r * np.log2(np.where(r > 0, r, 1.0) / c), 0.0)
        t2 = np.where(r < 1, (1 - r) * np.log2(np.where(r < 1, 1 - r, 1.0) / (1 - c)), 0.0)
    return float(np.dot(mass, t1 + t2))


def centroid_numeric_argmin(r, mass, delta: float = 1e-9, tol: float = 1e-10) -> float:
    """Golden-section minimizer of ``sum(mass * D([r,1-r] || [c,1-c]))``."""
    r = np.asarray(r, dtype=float).ravel()
    mass = np.asarray(mass, dtype=float).ravel()
    if mass.sum() <= 0:
        raise DomainError("cell has zero mass")
    lo, hi = delta, 1.0 - delta
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = _cell_kl(x1, r, mass), _cell_kl(x2, r, mass)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = _cell_kl(x1, r, mass)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = _cell_kl(x2, r, mass)
    return 0.5 * (lo + hi)


def kl_gap(r, c1: float, c2: float):
    """``D([r,1-r] || [c1,1-c1]) - D([r,1-r] || [c2,1-c2])`` (bits), elementwise in r.

    The closed form is affine in r with slope ``log2(c2 (1-c1) / (c1 (1-c2)))``;
    this evaluates both divergences directly so it can check that claim.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    one = np.ones_like(r)
    return np.array([_cell_kl(c1, r[i:i + 1], one[i:i + 1]) - _cell_kl(c2, r[i:i + 1], one[i:i + 1])
                     for i in range(r.size)])
