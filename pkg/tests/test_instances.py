"""Instance generators and their closed-form oracles."""

import numpy as np
import pytest

from sketchridge.instances import (
    gen_gap_hamming,
    gen_gaussian_instance,
    make_gap_hamming,
    random_gap_hamming,
)
from sketchridge.ridge import cost, ridge_exact


class TestGaussianInstances:
    def test_achieved_ratio_is_on_target(self):
        problem, _ = gen_gaussian_instance(30, 120, seed=0, target_ratio=2.0)
        sigma_true = np.linalg.svd(problem.A, compute_uv=False)[0]
        achieved = sigma_true**2 / problem.lam
        assert 0.95 * 2.0 <= achieved <= 1.05 * 2.0

    def test_fixed_seed_reproduces_bitwise(self):
        p1, s1 = gen_gaussian_instance(10, 40, seed=123)
        p2, s2 = gen_gaussian_instance(10, 40, seed=123)
        np.testing.assert_array_equal(p1.A, p2.A)
        np.testing.assert_array_equal(p1.b, p2.b)
        assert p1.lam == p2.lam and s1 == s2

    def test_exact_solver_smoke(self):
        problem, _ = gen_gaussian_instance(60, 700, seed=1)
        x = ridge_exact(problem)
        opt = cost(problem, x)
        assert 0.0 < opt < float(problem.b @ problem.b)

    def test_rejects_tall_instances(self):
        with pytest.raises(ValueError, match="n <= d"):
            gen_gaussian_instance(10, 5, seed=0)

    def test_rejects_bad_ratio(self):
        with pytest.raises(ValueError, match="ratio"):
            gen_gaussian_instance(4, 10, seed=0, target_ratio=0.0)


class TestGapHamming:
    def test_equal_vectors_have_cost_two(self):
        x = np.ones(6)
        problem, opt = gen_gap_hamming(x, x.copy(), 1.0)
        assert opt == pytest.approx(2.0, abs=1e-15)
        assert cost(problem, ridge_exact(problem)) == pytest.approx(2.0, abs=1e-10)

    def test_opposite_vectors(self):
        x = np.ones(10)
        problem, opt = gen_gap_hamming(x, -x, 1.0)
        assert opt == pytest.approx(2.0 / 21.0, abs=1e-15)
        assert cost(problem, ridge_exact(problem)) == pytest.approx(opt, abs=1e-12)

    def test_random_instance_matches_formula(self):
        inst = random_gap_hamming(50, lam=3.0, seed=7)
        got = cost(inst.problem, ridge_exact(inst.problem))
        assert abs(got - inst.opt) <= 1e-10 * (1 + inst.opt)

    def test_column_sign_flips_preserve_the_optimum(self):
        rng = np.random.default_rng(8)
        inst = random_gap_hamming(40, lam=2.0, seed=9)
        base = cost(inst.problem, ridge_exact(inst.problem))
        for _ in range(5):
            flips = rng.choice([1.0, -1.0], size=40)
            flipped = make_gap_hamming(inst.x * flips, inst.y * flips, 2.0)
            got = cost(flipped.problem, ridge_exact(flipped.problem))
            assert got == pytest.approx(base, abs=1e-10)

    def test_hamming_distance_and_shapes(self):
        inst = make_gap_hamming(np.array([1.0, -1.0, 1.0]),
                                np.array([1.0, 1.0, -1.0]), 1.0)
        assert inst.hamming == 2
        assert inst.problem.A.shape == (2, 3)
        np.testing.assert_array_equal(inst.problem.b, [1.0, -1.0])

    def test_rejects_non_sign_entries(self):
        with pytest.raises(ValueError, match=r"\{\+1, -1\}"):
            gen_gap_hamming(np.array([1.0, 0.5]), np.array([1.0, 1.0]), 1.0)

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            gen_gap_hamming(np.ones(3), np.ones(4), 1.0)
