import itertools

import numpy as np
import pytest

from actsum.errors import ShapeMismatch, SingularSubset
from actsum.losses import (
    actionness_ce_loss,
    build_dpp_kernel,
    dpp_mle_grad,
    dpp_mle_loss,
    joint_loss,
)

from conftest import random_psd


def subset_det_sum(kernel):
    """Oracle: sum of det(L_y) over all subsets, dets via np.linalg.det."""
    n = kernel.shape[0]
    total = 1.0  # empty subset
    for r in range(1, n + 1):
        for idx in itertools.combinations(range(n), r):
            total += np.linalg.det(kernel[np.ix_(idx, idx)])
    return total


class TestBuildDppKernel:
    def test_orthonormal_rows_give_identity(self):
        phi = np.eye(3)
        assert np.allclose(build_dpp_kernel(phi, np.ones(3)), np.eye(3), atol=1e-12)

    def test_hand_computed_two_frame_case(self):
        phi = np.array([[1.0, 0.0], [0.6, 0.8]])
        q = np.array([2.0, 3.0])
        expected = np.array([[4.0, 3.6], [3.6, 9.0]])
        assert np.allclose(build_dpp_kernel(phi, q), expected, atol=1e-12)

    def test_always_psd_by_eigen_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            phi = rng.normal(size=(6, 4)) * 3
            q = rng.normal(size=6)  # negative quality still yields PSD
            kernel = build_dpp_kernel(phi, q)
            assert np.allclose(kernel, kernel.T, atol=1e-12)
            assert np.linalg.eigvalsh(kernel).min() >= -1e-9

    def test_shape_mismatch(self):
        with pytest.raises(Exception):
            build_dpp_kernel(np.ones((3, 2)), np.ones(4))


class TestDppMleLoss:
    def test_identity_singleton(self):
        assert dpp_mle_loss(np.eye(2), [0]) == pytest.approx(np.log(4.0), abs=1e-12)

    def test_identity_empty_subset(self):
        assert dpp_mle_loss(np.eye(2), []) == pytest.approx(np.log(4.0), abs=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_subset_probabilities_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 8))
        kernel = random_psd(rng, n, jitter=1e-3)
        assert subset_det_sum(kernel) == pytest.approx(
            np.linalg.det(kernel + np.eye(n)), rel=1e-8
        )
        total = sum(
            np.exp(-dpp_mle_loss(kernel, idx))
            for r in range(n + 1)
            for idx in itertools.combinations(range(n), r)
        )
        assert total == pytest.approx(1.0, rel=1e-8)

    def test_singular_subset_raises(self):
        phi = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])  # rows 0,1 identical
        kernel = build_dpp_kernel(phi, np.ones(3))
        with pytest.raises(SingularSubset):
            dpp_mle_loss(kernel, [0, 1])
        assert np.isfinite(dpp_mle_loss(kernel, [0, 2]))

    def test_quality_scaling_keeps_equal_cardinality_ordering(self):
        rng = np.random.default_rng(3)
        phi = rng.normal(size=(5, 4))
        q = rng.random(5) + 0.5
        for c in (0.3, 2.0, 7.5):
            base = build_dpp_kernel(phi, q)
            scaled = build_dpp_kernel(phi, c * q)
            pairs = list(itertools.combinations(range(5), 2))
            for y1, y2 in itertools.combinations(pairs, 2):
                d1 = np.linalg.det(base[np.ix_(y1, y1)]) >= np.linalg.det(
                    base[np.ix_(y2, y2)]
                )
                d2 = np.linalg.det(scaled[np.ix_(y1, y1)]) >= np.linalg.det(
                    scaled[np.ix_(y2, y2)]
                )
                assert d1 == d2


class TestDppMleGrad:
    def test_identity_full_subset(self):
        grad = dpp_mle_grad(np.eye(2), [0, 1])
        assert np.allclose(grad, -0.5 * np.eye(2), atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        kernel = random_psd(rng, 4, jitter=0.3)
        y = [0, 2]
        grad = dpp_mle_grad(kernel, y)
        eps = 1e-6
        for i in range(4):
            for j in range(i, 4):
                bump = np.zeros((4, 4))
                bump[i, j] += eps
                bump[j, i] += eps
                hi = dpp_mle_loss(kernel + bump, y)
                lo = dpp_mle_loss(kernel - bump, y)
                numeric = (hi - lo) / (2 * eps)
                expected = grad[i, j] + grad[j, i]
                assert numeric == pytest.approx(expected, rel=1e-6, abs=1e-8)

    def test_symmetric_input_gives_symmetric_gradient(self):
        rng = np.random.default_rng(5)
        kernel = random_psd(rng, 5, jitter=0.2)
        grad = dpp_mle_grad(kernel, [1, 3])
        assert np.array_equal(grad, grad.T)

    def test_singular_subset_raises(self):
        kernel = build_dpp_kernel(np.ones((2, 1)), np.ones(2))
        with pytest.raises(SingularSubset):
            dpp_mle_grad(kernel, [0, 1])


class TestActionnessCeLoss:
    def test_perfect_prediction_is_zero(self):
        t = np.zeros((3, 4))
        t[[0, 1, 2], [1, 0, 3]] = 1.0
        # exact one-hot predictions, clamped inside the log
        assert actionness_ce_loss(t, t) == pytest.approx(0.0, abs=1e-10)

    def test_uniform_prediction(self):
        for n in (1, 4, 9):
            p = np.full((n, 4), 0.25)
            t = np.zeros((n, 4))
            t[:, 2] = 1.0
            assert actionness_ce_loss(p, t) == pytest.approx(n * np.log(4.0), rel=1e-12)

    def test_single_frame_hand_case(self):
        p = np.array([[0.1, 0.2, 0.6, 0.1]])
        t = np.array([[0.0, 0.0, 1.0, 0.0]])
        assert actionness_ce_loss(p, t) == pytest.approx(-np.log(0.6), abs=1e-12)
        assert -np.log(0.6) == pytest.approx(0.5108, abs=5e-5)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            actionness_ce_loss(np.full((2, 4), 0.25), np.zeros((3, 4)))


class TestJointLoss:
    def test_lambda_zero(self):
        assert joint_loss(1.25, 99.0, 0.0) == 1.25

    def test_weighting(self):
        assert joint_loss(0.0, 1.0, 0.003) == pytest.approx(0.003, abs=1e-15)

    def test_affine_in_lambda(self):
        s, r, lam = 2.0, 5.0, 0.003
        assert joint_loss(s, r, 2 * lam) - joint_loss(s, r, lam) == pytest.approx(
            lam * r, abs=1e-12
        )

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            joint_loss(1.0, 1.0, -0.1)
