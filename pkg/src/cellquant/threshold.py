"""Two-cell quantizers: scalar threshold scan, y-cuts and the monotone-ratio test."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from cellquant.channel import ChannelSpec, default_range, log_density
from cellquant.constraints import SeparableConstraint
from cellquant.dp_solver import SolveResult, result_for_boundaries
from cellquant.errors import DomainError

__all__ = [
    "ScalarThreshold",
    "scan_scalar_threshold",
    "check_single_threshold",
    "grid_single_threshold",
    "map_r_threshold_to_y",
    "quantizer_y_cuts",
]

log = logging.getLogger(__name__)

_STRICT_TOL = 1e-12


@dataclass(frozen=True)
class ScalarThreshold:
    a_star: float
    y_cuts: tuple[float, ...]
    single_threshold: bool


def _mi_rows(a, b):
    """Vectorized I(X;Z) over candidate two-cell splits.

    ``a`` and ``b`` have shape ``(K, 2)``: joint masses of (x1, x2) per cell.
    """
    px1 = a.sum(axis=1, keepdims=True)
    px2 = b.sum(axis=1, keepdims=True)
    pz = a + b
    out = np.zeros(a.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        for row, px in ((a, px1), (b, px2)):
            t = np.where(row > 0, row * np.log2(row / (px * pz)), 0.0)
            out += t.sum(axis=1)
    return np.maximum(out, 0.0)


def scan_scalar_threshold(grid, beta: float, constraint: SeparableConstraint,
                          epsilon: float = 1e-4,
                          channel: ChannelSpec | None = None) -> tuple[ScalarThreshold, SolveResult]:
    """Exhaustive scan of ``a`` in ``{eps, 2 eps, ..., 1 - eps}`` for N = 2.

    An atom goes to the first cell iff ``r <= a``.  Candidates that induce
    the same split form a contiguous run; the reported ``a_star`` is the
    centre of the first run achieving the maximum objective.
    """
    if not 0.0 < epsilon < 0.5:
        raise DomainError("epsilon must lie in (0, 0.5)")
    terms = constraint.terms_for(2)
    k_max = int(round(1.0 / epsilon))
    cand = np.arange(1, k_max) * epsilon
    cand = cand[cand < 1.0]
    split = np.searchsorted(grid.r, cand, side="right")

    uniq = np.unique(split)
    zero = np.zeros(1)
    c_mass = np.concatenate([zero, np.cumsum(grid.mass)])
    c_x1 = np.concatenate([zero, np.cumsum(grid.mass * grid.r)])
    c_x2 = np.concatenate([zero, np.cumsum(grid.mass * (1.0 - grid.r))])
    a = np.stack([c_x1[uniq], c_x1[-1] - c_x1[uniq]], axis=1)
    b = np.stack([c_x2[uniq], c_x2[-1] - c_x2[uniq]], axis=1)
    w1 = np.clip(c_mass[uniq], 0.0, 1.0)
    w2 = np.clip(c_mass[-1] - c_mass[uniq], 0.0, 1.0)
    obj = beta * _mi_rows(a, b) - (np.asarray(terms[0](w1)) + np.asarray(terms[1](w2)))
    best = int(np.argmax(obj))
    k = int(uniq[best])
    run = cand[split == k]
    a_star = float(0.5 * (run[0] + run[-1]))

    result = result_for_boundaries(grid, (0, k, grid.size), beta, constraint)
    cuts = map_r_threshold_to_y(grid, a_star)
    single = check_single_threshold(channel) if channel is not None else grid_single_threshold(grid)
    return ScalarThreshold(a_star=a_star, y_cuts=tuple(cuts), single_threshold=single), result


def map_r_threshold_to_y(grid, a_star: float) -> list[float]:
    """Midpoints in y between y-adjacent atoms on opposite sides of ``a_star``."""
    if not 0.0 < a_star < 1.0:
        raise DomainError("a_star must lie in (0, 1)")
    order = grid.y_order()
    y = grid.y[order]
    low = grid.r[order] <= a_star
    flips = np.nonzero(low[1:] != low[:-1])[0]
    return [float(0.5 * (y[i] + y[i + 1])) for i in flips]


def quantizer_y_cuts(grid, q) -> list[float]:
    """Midpoints in y wherever the cell label changes between y-adjacent atoms."""
    order = grid.y_order()
    y = grid.y[order]
    labels = q.labels()[order]
    flips = np.nonzero(labels[1:] != labels[:-1])[0]
    return [float(0.5 * (y[i] + y[i + 1])) for i in flips]


def _monotone_verdict(values: np.ndarray) -> bool:
    d = np.diff(values)
    up = d > _STRICT_TOL
    down = d < -_STRICT_TOL
    if up.any() and down.any():
        return False
    return bool(up.any() or down.any())


def check_single_threshold(channel: ChannelSpec, probe_points: int = 1001,
                           y_range: tuple[float, float] | None = None) -> bool:
    """Whether ``phi2 / phi1`` is monotone on a probe grid.

    The log-ratio is sampled at ``probe_points`` evenly spaced outputs where
    both densities are positive.  It must move in one direction between
    probes and move by more than 1e-12 at least once; flat stretches (as in
    a Laplace pair beyond its locations) are accepted because the posterior
    level sets they create still split y at a single point.
    """
    if probe_points < 3:
        raise DomainError("probe_points must be >= 3")
    lo, hi = y_range or default_range(channel)
    y = np.linspace(lo, hi, int(probe_points))
    l1 = np.asarray(log_density(channel.phi1, y))
    l2 = np.asarray(log_density(channel.phi2, y))
    ok = np.isfinite(l1) & np.isfinite(l2)
    dropped = int((~ok).sum())
    if dropped:
        log.warning("excluded %d probe point(s) where a density is zero", dropped)
    if ok.sum() < 2:
        return False
    return _monotone_verdict((l2 - l1)[ok])


def grid_single_threshold(grid) -> bool:
    """Monotonicity of the posterior along y on an already discretized grid."""
    r = grid.r[grid.y_order()]
    return _monotone_verdict(r) if r.size >= 2 else False

