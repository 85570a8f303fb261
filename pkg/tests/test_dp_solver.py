import numpy as np
import pytest

from cellquant.constraints import EntropyTerm, LinearTerm, SeparableConstraint
from cellquant.dp_solver import interval_cost, result_for_boundaries, solve, sweep_beta
from cellquant.channel import PosteriorGrid
from cellquant.errors import DomainError
from cellquant.measure import PrefixSums
from cellquant.oracle import brute_force_solve

from conftest import SEEDS, random_grid

KL_075 = 0.18872187554086717
ZERO = SeparableConstraint.zero()


class TestIntervalCost:
    def setup_method(self):
        self.grid = PosteriorGrid.from_atoms([0.25, 0.75], [0.5, 0.5])
        self.ps = PrefixSums.from_grid(self.grid)

    def test_singleton(self):
        assert interval_cost(self.ps, 0, 1, 0, 1.0, ZERO, 2) == 0.0

    def test_empty_with_entropy(self):
        assert interval_cost(self.ps, 1, 1, 0, 1.0, SeparableConstraint.entropy(1.0), 2) == 0.0

    def test_pair(self):
        assert interval_cost(self.ps, 0, 2, 0, 1.0, ZERO, 1) == pytest.approx(KL_075, abs=1e-12)

    def test_bad_index(self):
        with pytest.raises(DomainError):
            interval_cost(self.ps, 2, 1, 0, 1.0, ZERO, 1)
        with pytest.raises(DomainError):
            interval_cost(self.ps, 0, 3, 0, 1.0, ZERO, 1)
        with pytest.raises(DomainError):
            interval_cost(self.ps, 0, 1, 2, 1.0, ZERO, 2)


class TestSolve:
    def test_single_cell(self, rng):
        grid = random_grid(rng, 12)
        res = solve(grid, 1, 1.0, ZERO)
        assert res.boundaries == (0, 12)
        assert res.mi_xz == 0.0
        assert res.distortion == pytest.approx(grid.mutual_information(), abs=1e-12)

    def test_refinement_reaches_mi_xy(self, rng):
        grid = random_grid(rng, 6, ties=True)
        n = grid.distinct_r_count()
        res = solve(grid, n + 1, 1.0, ZERO)
        assert abs(res.mi_xz - grid.mutual_information()) < 1e-12
        assert res.distortion < 1e-12

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        grid = random_grid(rng, 8)
        c = SeparableConstraint.entropy(0.3)
        res = solve(grid, 3, 1.0, c)
        bf = brute_force_solve(grid, 3, 1.0, c)
        assert abs(res.objective - bf.objective) < 1e-9

    def test_identity_in_result(self, rng):
        for _ in range(20):
            grid = random_grid(rng, 15)
            beta = float(rng.uniform(0.1, 3))
            res = solve(grid, 3, beta, SeparableConstraint.entropy(0.2))
            assert res.objective == pytest.approx(beta * res.mi_xz - res.constraint_value, abs=1e-12)
            assert res.objective == pytest.approx(
                beta * (res.mi_xy - res.distortion) - res.constraint_value, abs=1e-9)
            assert res.mi_xz <= res.mi_xy + 1e-12

    def test_boundaries_monotone(self, rng):
        grid = random_grid(rng, 40)
        res = solve(grid, 5, 1.0, SeparableConstraint.entropy(0.1))
        b = res.boundaries
        assert b[0] == 0 and b[-1] == 40 and all(x <= y for x, y in zip(b, b[1:]))
        assert len(res.quantizer.r_thresholds) == 6

    def test_nesting(self, rng):
        grid = random_grid(rng, 30)
        objs = [solve(grid, n, 1.0, ZERO).objective for n in range(1, 7)]
        assert all(b >= a - 1e-12 for a, b in zip(objs, objs[1:]))

    def test_empty_cells_allowed(self):
        grid = PosteriorGrid.from_atoms([0.1, 0.9], [0.5, 0.5])
        res = solve(grid, 4, 1.0, ZERO)
        assert res.empty_cells == 2
        assert res.mi_xz == pytest.approx(grid.mutual_information())

    def test_permutation_search(self):
        # Heavy penalty on the first term should push it onto the lighter cell.
        rng = np.random.default_rng(3)
        grid = random_grid(rng, 8)
        c = SeparableConstraint.of([LinearTerm(5.0), LinearTerm(0.0)])
        plain = solve(grid, 2, 1.0, c)
        perm = solve(grid, 2, 1.0, c, permute_constraints=True)
        bf = brute_force_solve(grid, 2, 1.0, c)
        assert perm.objective >= plain.objective - 1e-12
        assert abs(perm.objective - bf.objective) < 1e-9

    def test_rejects_bad_args(self, rng):
        grid = random_grid(rng, 5)
        with pytest.raises(DomainError):
            solve(grid, 0, 1.0, ZERO)
        with pytest.raises(DomainError):
            solve(grid, 2, -1.0, ZERO)


class TestSweep:
    def test_order_and_length(self, rng):
        grid = random_grid(rng, 20)
        betas = [2.0, 0.0, 1.0]
        res = sweep_beta(grid, 3, SeparableConstraint.entropy(0.5), betas)
        assert [r.beta for r in res] == betas

    def test_beta_zero_minimizes_entropy(self, rng):
        grid = random_grid(rng, 20)
        res = sweep_beta(grid, 3, SeparableConstraint.entropy(1.0), [0.0])[0]
        assert res.constraint_value == pytest.approx(0.0, abs=1e-15)

    def test_large_beta_matches_unconstrained(self, rng):
        grid = random_grid(rng, 25)
        big = sweep_beta(grid, 3, SeparableConstraint.entropy(1.0), [1e6])[0]
        free = solve(grid, 3, 1.0, ZERO)
        assert big.boundaries == free.boundaries

    def test_frontier_monotone(self):
        rng = np.random.default_rng(SEEDS["frontier"])
        betas = [0, 0.25, 0.5, 1, 2, 4, 8, 100]
        for _ in range(10):
            grid = random_grid(rng, 30)
            res = sweep_beta(grid, 3, SeparableConstraint.entropy(1.0), betas)
            mi = [r.mi_xz for r in res]
            cv = [r.constraint_value for r in res]
            assert all(b >= a - 1e-12 for a, b in zip(mi, mi[1:]))
            assert all(b >= a - 1e-12 for a, b in zip(cv, cv[1:]))

    def test_empty_betas(self, rng):
        with pytest.raises(DomainError):
            sweep_beta(random_grid(rng, 4), 2, ZERO, [])


def test_result_for_boundaries(rng):
    grid = random_grid(rng, 6)
    res = result_for_boundaries(grid, (0, 3, 6), 1.0, SeparableConstraint.of([EntropyTerm(1), EntropyTerm(1)]))
    assert res.cell_terms == (0, 1)
    assert res.cell_masses.sum() == pytest.approx(1.0)
