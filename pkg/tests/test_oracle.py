import numpy as np
import pytest

from cellquant.channel import PosteriorGrid
from cellquant.constraints import SeparableConstraint
from cellquant.dp_solver import solve
from cellquant.errors import OracleSizeError
from cellquant.measure import cell_centroid, total_distortion
from cellquant.oracle import (
    GeneralQuantizer,
    brute_force_solve,
    centroid_numeric_argmin,
    kl_gap,
    rearrange_to_convex,
)
from cellquant.quantizer import ConvexCellQuantizer

from conftest import random_grid

ZERO = SeparableConstraint.zero()


class TestBruteForce:
    def test_two_atoms_separate(self):
        grid = PosteriorGrid.from_atoms([0.2, 0.7], [0.4, 0.6])
        bf = brute_force_solve(grid, 2, 1.0, ZERO)
        assert bf.quantizer.labels[0] != bf.quantizer.labels[1]
        assert bf.objective == pytest.approx(grid.mutual_information(), abs=1e-15)

    def test_six_atoms_vs_dp(self):
        rng = np.random.default_rng(99)
        grid = random_grid(rng, 6)
        c = SeparableConstraint.entropy(0.5)
        assert abs(brute_force_solve(grid, 2, 1.0, c).objective - solve(grid, 2, 1.0, c).objective) < 1e-9

    def test_equal_r(self):
        grid = PosteriorGrid.from_atoms(np.full(5, 0.4), [1, 2, 3, 4, 5])
        c = SeparableConstraint.entropy(1.0)
        bf = brute_force_solve(grid, 2, 1.0, c)
        assert bf.mi_xz == pytest.approx(0.0, abs=1e-15)
        assert bf.objective == pytest.approx(-bf.constraint_value)

    def test_guard(self):
        grid = random_grid(np.random.default_rng(0), 20)
        with pytest.raises(OracleSizeError):
            brute_force_solve(grid, 3, 1.0, ZERO)

    def test_chunked_enumeration(self):
        # 4^9 = 262144 labelings spans several enumeration chunks
        grid = random_grid(np.random.default_rng(4), 9)
        c = SeparableConstraint.entropy(0.2)
        bf = brute_force_solve(grid, 4, 1.0, c)
        assert bf.labelings == 4**9
        assert abs(bf.objective - solve(grid, 4, 1.0, c).objective) < 1e-9


class TestRearrange:
    def test_already_convex(self):
        grid = PosteriorGrid.from_atoms([0.1, 0.3, 0.6, 0.8], np.ones(4))
        out = rearrange_to_convex(grid, GeneralQuantizer([0, 0, 1, 1], 2))
        assert out.exact and out.quantizer.boundaries == (0, 2, 4)
        assert total_distortion(grid, out.quantizer) == pytest.approx(
            total_distortion(grid, GeneralQuantizer([0, 0, 1, 1], 2)))

    def test_alternating_strictly_better(self):
        grid = PosteriorGrid.from_atoms([0.1, 0.3, 0.6, 0.8], np.ones(4))
        q = GeneralQuantizer([0, 1, 0, 1], 2)
        out = rearrange_to_convex(grid, q)
        # hand values: alternating cells {0.1,0.6} and {0.3,0.8} versus {0.1,0.3}, {0.6,0.8}
        assert out.quantizer.boundaries == (0, 2, 4)
        assert total_distortion(grid, out.quantizer) < total_distortion(grid, q)

    def test_equal_centroids_merge(self):
        grid = PosteriorGrid.from_atoms([0.2, 0.4, 0.6, 0.8], np.ones(4))
        q = GeneralQuantizer([0, 1, 1, 0], 2)
        out = rearrange_to_convex(grid, q)
        assert out.merged and out.quantizer.n_cells == 1
        assert total_distortion(grid, out.quantizer) == pytest.approx(total_distortion(grid, q), abs=1e-15)

    def test_flags_inexact(self):
        grid = PosteriorGrid.from_atoms([0.1, 0.5, 0.9], [0.5, 0.3, 0.2])
        out = rearrange_to_convex(grid, GeneralQuantizer([1, 0, 1], 2))
        assert not out.exact

    def test_low_label_goes_left(self):
        grid = PosteriorGrid.from_atoms([0.1, 0.3, 0.6, 0.8], np.ones(4))
        out = rearrange_to_convex(grid, GeneralQuantizer([1, 0, 1, 0], 2))
        assert out.low_label == 1


class TestCentroidOracle:
    def test_known_values(self):
        assert centroid_numeric_argmin([0.2, 0.6], [0.1, 0.3]) == pytest.approx(0.5, abs=1e-6)
        assert centroid_numeric_argmin([0.9], [1.0]) == pytest.approx(0.9, abs=1e-8)
        assert centroid_numeric_argmin([0.1, 0.9], [0.5, 0.5]) == pytest.approx(0.5, abs=1e-8)

    def test_random(self, rng):
        for _ in range(50):
            k = int(rng.integers(1, 8))
            r, w = rng.uniform(0, 1, k), rng.uniform(0.01, 1, k)
            assert abs(centroid_numeric_argmin(r, w) - cell_centroid(r, w)) < 1e-6


def test_kl_gap_affine():
    c1, c2 = 0.2, 0.7
    r = np.linspace(0, 1, 11)
    slope = np.log2(c2 * (1 - c1) / (c1 * (1 - c2)))
    np.testing.assert_allclose(kl_gap(r, c1, c2), r * slope + np.log2((1 - c2) / (1 - c1)), atol=1e-12)
