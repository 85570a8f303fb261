"""Quantizer representations shared by the solvers and the oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from cellquant.errors import InvalidQuantizerError

__all__ = ["ConvexCellQuantizer", "GeneralQuantizer", "Quantizer", "cell_labels"]


@dataclass(frozen=True)
class ConvexCellQuantizer:
    """Contiguous cells over an r-sorted grid.

    Cell ``i`` holds the atoms with storage index in
    ``[boundaries[i], boundaries[i + 1])``.  ``r_thresholds`` are the matching
    cut points in posterior space, ``0 = h_0 <= h_1 <= ... <= h_N = 1``.
    """

    boundaries: tuple[int, ...]
    r_thresholds: tuple[float, ...]

    @classmethod
    def from_boundaries(cls, grid, boundaries: Sequence[int]) -> "ConvexCellQuantizer":
        b = tuple(int(v) for v in boundaries)
        m = grid.size
        if len(b) < 2 or b[0] != 0 or b[-1] != m:
            raise InvalidQuantizerError(f"boundaries must start at 0 and end at {m}, got {b}")
        if any(hi < lo for lo, hi in zip(b, b[1:])):
            raise InvalidQuantizerError(f"boundaries must be nondecreasing, got {b}")
        return cls(boundaries=b, r_thresholds=tuple(_threshold_at(grid.r, c) for c in b))

    @property
    def n_cells(self) -> int:
        return len(self.boundaries) - 1

    def labels(self) -> np.ndarray:
        """Cell index of every atom, in storage order."""
        return np.repeat(np.arange(self.n_cells), np.diff(self.boundaries))


def _threshold_at(r: np.ndarray, cut: int) -> float:
    if cut <= 0:
        return 0.0
    if cut >= r.size:
        return 1.0
    return 0.5 * (float(r[cut - 1]) + float(r[cut]))


@dataclass(frozen=True, eq=False)
class GeneralQuantizer:
    """Arbitrary labeling of atoms (storage order) into ``n_cells`` cells."""

    labels: np.ndarray
    n_cells: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_cells):
            raise InvalidQuantizerError("labels must lie in [0, n_cells)")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)


Quantizer = Union[ConvexCellQuantizer, GeneralQuantizer]


def cell_labels(grid, q: Quantizer) -> tuple[np.ndarray, int]:
    """Per-atom labels and cell count for either quantizer kind."""
    if isinstance(q, ConvexCellQuantizer):
        if q.boundaries[0] != 0 or q.boundaries[-1] != grid.size:
            raise InvalidQuantizerError("quantizer does not cover the grid")
        if any(hi < lo for lo, hi in zip(q.boundaries, q.boundaries[1:])):
            raise InvalidQuantizerError("boundaries must be nondecreasing")
        return q.labels(), q.n_cells
    if isinstance(q, GeneralQuantizer):
        if q.labels.size != grid.size:
            raise InvalidQuantizerError(
                f"label count {q.labels.size} does not match atom count {grid.size}")
        return q.labels, q.n_cells
    raise InvalidQuantizerError(f"not a quantizer: {type(q).__name__}")
