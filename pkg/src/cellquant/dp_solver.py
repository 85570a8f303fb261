"""Globally optimal convex-cell quantizer by dynamic programming.

Cells are contiguous runs of the r-sorted grid.  The cost of giving atoms
``[i, j)`` to cell ``n`` is ``beta * distortion(i, j) + g_n(mass(i, j))``,
evaluated in O(1) from prefix sums; the DP minimizes the summed cost in
O(N * M^2) time.  The inner loop runs in a compiled kernel when the
extension is built and in numpy otherwise; set ``CELLQUANT_BACKEND=python``
to force the fallback.
"""

from __future__ import annotations

import itertools
import logging
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from cellquant import _dp_python
from cellquant.constraints import SeparableConstraint, assemble_objective
from cellquant.errors import DomainError
from cellquant.measure import CellStats, PrefixSums, cell_stats
from cellquant.quantizer import ConvexCellQuantizer

try:
    from cellquant import _dpcore
except ImportError:  # extension not built
    _dpcore = None

__all__ = [
    "BACKEND",
    "available_backends",
    "ConvexCellQuantizer",
    "SolveResult",
    "interval_cost",
    "solve",
    "sweep_beta",
]

log = logging.getLogger(__name__)


def available_backends() -> tuple[str, ...]:
    return ("cython", "python") if _dpcore is not None else ("python",)


def _default_backend() -> str:
    forced = os.environ.get("CELLQUANT_BACKEND", "").strip().lower()
    if forced:
        if forced not in ("cython", "python"):
            raise ImportError(f"CELLQUANT_BACKEND must be 'cython' or 'python', got {forced!r}")
        if forced == "cython" and _dpcore is None:
            raise ImportError("CELLQUANT_BACKEND=cython but cellquant._dpcore is not built")
        return forced
    return available_backends()[0]


BACKEND = _default_backend()


def _kernel(backend: str | None):
    name = backend or BACKEND
    if name == "cython":
        if _dpcore is None:
            raise DomainError("the compiled kernel is not available")
        return _dpcore.dp_solve
    if name == "python":
        return _dp_python.dp_solve
    raise DomainError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class SolveResult:
    """Optimal quantizer and the quantities it achieves.

    ``cell_terms[i]`` is the index of the constraint term charged to the
    i-th cell in r-order (the identity unless permutations were searched).
    """

    quantizer: ConvexCellQuantizer
    beta: float
    mi_xz: float
    mi_xy: float
    constraint_value: float
    distortion: float
    objective: float
    per_cell: tuple[CellStats, ...]
    cell_terms: tuple[int, ...]
    empty_cells: int = 0

    @property
    def boundaries(self) -> tuple[int, ...]:
        return self.quantizer.boundaries

    @property
    def cell_masses(self) -> np.ndarray:
        return np.array([c.mass for c in self.per_cell])


def interval_cost(prefix: PrefixSums, i: int, j: int, n: int, beta: float,
                  constraint: SeparableConstraint, n_cells: int | None = None) -> float:
    """Cost of assigning atoms ``[i, j)`` to cell ``n`` (0-based)."""
    m = prefix.size
    if not (0 <= i <= j <= m):
        raise DomainError(f"interval [{i}, {j}) outside [0, {m}]")
    terms = constraint.terms_for(n_cells if n_cells is not None else len(constraint.terms))
    if not 0 <= n < len(terms):
        raise DomainError(f"cell index {n} outside [0, {len(terms)})")
    w = min(max(float(prefix.mass(i, j)), 0.0), 1.0)
    return beta * prefix.distortion(i, j) + float(terms[n](w))


def _encode(terms) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    enc = [t.encode() for t in terms]
    kinds = np.array([e[0] for e in enc], dtype=np.int64)
    pa = np.array([e[1] for e in enc], dtype=np.float64)
    pb = np.array([e[2] for e in enc], dtype=np.float64)
    return kinds, pa, pb


def _orders(terms, permute: bool):
    if not permute:
        yield tuple(range(len(terms)))
        return
    seen = set()
    for order in itertools.permutations(range(len(terms))):
        key = tuple(terms[k] for k in order)
        if key in seen:
            continue
        seen.add(key)
        yield order


def solve(grid, n_cells: int, beta: float, constraint: SeparableConstraint, *,
          permute_constraints: bool = False, backend: str | None = None,
          prefix: PrefixSums | None = None) -> SolveResult:
    """Globally optimal ``n_cells``-cell convex quantizer for ``beta * I - C``.

    Cells are charged constraint terms in index order along increasing r.
    With ``permute_constraints`` every distinct assignment of terms to
    r-ordered cells is tried (intended for N <= 4 with unequal terms).
    Empty cells are allowed and cost ``g_n(0)``.
    """
    if int(n_cells) != n_cells or n_cells < 1:
        raise DomainError("n_cells must be an integer >= 1")
    if beta < 0 or not np.isfinite(beta):
        raise DomainError("beta must be finite and >= 0")
    n_cells = int(n_cells)
    terms = constraint.terms_for(n_cells)
    prefix = prefix or PrefixSums.from_grid(grid)
    kernel = _kernel(backend)

    best = None
    for order in _orders(terms, permute_constraints):
        kinds, pa, pb = _encode([terms[k] for k in order])
        cost, bounds = kernel(prefix.s0, prefix.s1, prefix.sh, float(beta), kinds, pa, pb)
        if best is None or cost < best[0]:
            best = (cost, bounds, order)
    _, bounds, order = best
    q = ConvexCellQuantizer.from_boundaries(grid, bounds)
    return _result(grid, q, beta, constraint, order)


def _result(grid, q: ConvexCellQuantizer, beta: float, constraint: SeparableConstraint,
            order: Sequence[int]) -> SolveResult:
    obj = assemble_objective(beta, grid, q, constraint, order)
    b = q.boundaries
    per_cell = tuple(cell_stats(grid.r[lo:hi], grid.mass[lo:hi]) for lo, hi in zip(b, b[1:]))
    empty = sum(1 for c in per_cell if c.mass == 0)
    if empty:
        log.warning("optimal quantizer uses %d empty cell(s)", empty)
    return SolveResult(
        quantizer=q,
        beta=float(beta),
        mi_xz=obj.mi_xz,
        mi_xy=grid.mutual_information(),
        constraint_value=obj.constraint_value,
        distortion=obj.distortion,
        objective=obj.value,
        per_cell=per_cell,
        cell_terms=tuple(int(k) for k in order),
        empty_cells=empty,
    )


def result_for_boundaries(grid, boundaries: Sequence[int], beta: float,
                          constraint: SeparableConstraint) -> SolveResult:
    """Evaluate a given convex-cell quantizer as a :class:`SolveResult`."""
    q = ConvexCellQuantizer.from_boundaries(grid, boundaries)
    return _result(grid, q, beta, constraint, tuple(range(q.n_cells)))


def sweep_beta(grid, n_cells: int, constraint: SeparableConstraint, betas: Sequence[float],
               **kwargs) -> list[SolveResult]:
    """One :func:`solve` per trade-off weight, in input order."""
    if len(betas) == 0:
        raise DomainError("betas must be nonempty")
    prefix = PrefixSums.from_grid(grid)
    return [solve(grid, n_cells, float(b), constraint, prefix=prefix, **kwargs) for b in betas]
