import numpy as np
import pytest

from paretohv.hvgrad import dynamic_reference, dynamic_weights, hypervolume_gradients
from paretohv.pareto import hypervolume_exact

from test_pareto import random_nondominated_front


def finite_difference_gradients(points, reference, step=1e-5):
    """Central differences of the exact hypervolume, the oracle the sweep
    implementation must match."""
    pts = np.asarray(points, float)
    grads = np.zeros_like(pts)
    for i in range(pts.shape[0]):
        for j in range(pts.shape[1]):
            up = pts.copy()
            up[i, j] += step
            down = pts.copy()
            down[i, j] -= step
            grads[i, j] = (
                hypervolume_exact(up, reference) - hypervolume_exact(down, reference)
            ) / (2.0 * step)
    return grads


class TestDynamicReference:
    def test_scales_maxima(self):
        ref = dynamic_reference(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert np.allclose(ref, [2.2, 2.2])

    def test_zero_max_keeps_reference_at_zero(self):
        # the touching point rides the zero-derivative path; any positive
        # floor would make the dead axis dominate the normalized weights
        ref = dynamic_reference(np.array([[0.0, 1.0]]))
        assert np.allclose(ref, [0.0, 1.1])

    def test_any_dimension(self):
        ref = dynamic_reference(np.array([[3.0, 1.0, 0.5, 2.0]]))
        assert np.allclose(ref, [3.3, 1.1, 0.55, 2.2])

    def test_points_stay_strictly_inside(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            pts = rng.uniform(-1.0, 3.0, size=(6, 3))
            ref = dynamic_reference(pts)
            top = pts.max(axis=0)
            assert np.all(top[top != 0.0] < ref[top != 0.0])


class TestHypervolumeGradients:
    def test_single_point_box_partials(self):
        grads = hypervolume_gradients([[1.0, 1.0]], [2.0, 2.0])
        assert np.allclose(grads, [[-1.0, -1.0]])

    def test_two_point_front_by_hand(self):
        grads = hypervolume_gradients([[0.5, 1.0], [1.0, 0.5]], [2.0, 2.0])
        assert np.allclose(grads[0], [-1.0, -0.5])
        assert np.allclose(grads[1], [-0.5, -1.0])

    def test_dominated_pair_rejected(self):
        with pytest.raises(ValueError):
            hypervolume_gradients([[1.0, 1.0], [2.0, 2.0]], [3.0, 3.0])

    def test_point_beyond_reference_gets_zero(self):
        grads = hypervolume_gradients([[0.5, 1.0], [0.1, 2.5]], [2.0, 2.0])
        assert np.allclose(grads[1], 0.0)
        assert np.all(grads[0] < 0.0)

    def test_exact_duplicates_get_zero(self):
        grads = hypervolume_gradients([[1.0, 1.0], [1.0, 1.0]], [2.0, 2.0])
        assert np.allclose(grads, 0.0)

    @pytest.mark.parametrize("dim", [2, 3])
    def test_matches_finite_differences(self, dim):
        # acceptance: 50 random fronts per dimension, relative error <= 1e-4
        rng = np.random.default_rng(100 + dim)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(2, 9))
            front = random_nondominated_front(rng, n, dim)
            ref = np.full(dim, 2.0)
            analytic = hypervolume_gradients(front, ref)
            numeric = finite_difference_gradients(front, ref)
            err = np.abs(analytic - numeric) / (1.0 + np.abs(numeric))
            worst = max(worst, float(err.max()))
        assert worst <= 1e-4

    def test_translation_invariance(self):
        rng = np.random.default_rng(55)
        front = random_nondominated_front(rng, 6, 3)
        ref = np.full(3, 2.0)
        base = hypervolume_gradients(front, ref)
        shift = np.array([0.7, -0.3, 1.1])
        moved = hypervolume_gradients(front + shift, ref + shift)
        assert np.allclose(base, moved, atol=1e-12)


class TestDynamicWeights:
    def test_single_solution_unit_diagonal(self):
        weights = dynamic_weights(np.array([[1.0, 1.0]]))
        assert np.allclose(weights, [[1.0 / np.sqrt(2.0)] * 2])

    def test_weights_have_unit_norm_or_zero(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            losses = rng.uniform(0.1, 2.0, size=(10, 2))
            weights = dynamic_weights(losses)
            norms = np.linalg.norm(weights, axis=1)
            for norm in norms:
                assert norm == pytest.approx(1.0, abs=1e-9) or norm == 0.0

    def test_dominated_chain_each_rank_nonzero(self):
        # three mutually dominating points: one rank each, all weighted
        weights = dynamic_weights(np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]))
        norms = np.linalg.norm(weights, axis=1)
        assert np.all(norms > 0.0)
        assert np.allclose(norms, 1.0, atol=1e-9)

    def test_weights_are_nonnegative(self):
        rng = np.random.default_rng(88)
        for _ in range(20):
            losses = rng.uniform(0.05, 2.0, size=(12, 3))
            assert np.all(dynamic_weights(losses) >= -1e-12)


def test_corner_solution_of_its_rank_keeps_nonzero_weight():
    # per-rank references sit strictly outside each rank, so even the
    # rank's worst point keeps a usable descent direction
    losses = np.array([[0.5, 1.5], [1.0, 1.0], [1.5, 0.5]])
    weights = dynamic_weights(losses)
    assert np.all(np.linalg.norm(weights, axis=1) > 0.0)
