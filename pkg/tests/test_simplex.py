import numpy as np
import pytest
from scipy import stats

from paretohv.simplex import (
    angular_midpoint_rays,
    is_valid_ray,
    project_to_simplex,
    sample_angular_rays,
    uniform_simplex_point,
    uniform_simplex_points,
)


def test_single_point_is_valid_ray():
    rng = np.random.default_rng(7)
    ray = uniform_simplex_point(rng, 2)
    assert ray.shape == (2,)
    assert is_valid_ray(ray)
    assert 0.0 <= ray[0] <= 1.0
    assert ray[1] == pytest.approx(1.0 - ray[0], abs=1e-12)


def test_rejects_dimension_below_two():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        uniform_simplex_point(rng, 1)


def test_uniform_mean_matches_simplex_center():
    # symmetry of the uniform law: E[coordinate] = 1/3 at dimension 3
    rng = np.random.default_rng(123)
    draws = uniform_simplex_points(rng, 100_000, 3)
    assert np.allclose(draws.mean(axis=0), 1.0 / 3.0, atol=0.01)


def test_first_coordinate_uniform_marginal_in_2d():
    # the 2-dimensional uniform simplex marginal is Uniform[0, 1]
    rng = np.random.default_rng(99)
    draws = uniform_simplex_points(rng, 100_000, 2)
    _, p_value = stats.kstest(draws[:, 0], "uniform")
    assert p_value >= 0.01


def test_simplex_invariants_hold_on_bulk_draws():
    rng = np.random.default_rng(5)
    for dim in (2, 3, 5, 8):
        draws = uniform_simplex_points(rng, 2500, dim)
        assert np.all(draws >= 0.0)
        assert np.allclose(draws.sum(axis=1), 1.0, atol=1e-9)


class TestAngularSampler:
    def test_diagonal_angle_maps_to_even_split(self):
        ray = np.array([np.cos(np.pi / 4), np.sin(np.pi / 4)])
        ray = ray / ray.sum()
        assert np.allclose(ray, [0.5, 0.5])

    def test_single_cell_draw_stays_interior(self):
        rng = np.random.default_rng(11)
        rays = sample_angular_rays(1, rng)
        assert rays.shape == (1, 2)
        assert 0.0 < rays[0, 0] < 1.0
        assert 0.0 < rays[0, 1] < 1.0
        assert rays[0].sum() == pytest.approx(1.0, abs=1e-9)

    def test_four_cells_draw_from_disjoint_arcs(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            rays = sample_angular_rays(4, rng)
            angles = np.arctan2(rays[:, 1], rays[:, 0])
            edges = np.linspace(0.0, np.pi / 2, 5)
            for i, angle in enumerate(angles):
                assert edges[i] <= angle < edges[i + 1]

    def test_first_coordinate_strictly_descends(self):
        rng = np.random.default_rng(17)
        for count in (2, 8, 25, 90):
            rays = sample_angular_rays(count, rng)
            assert np.all(np.diff(rays[:, 0]) < 0.0)

    def test_midpoint_rays_deterministic_and_valid(self):
        rays = angular_midpoint_rays(25)
        assert rays.shape == (25, 2)
        assert np.allclose(rays.sum(axis=1), 1.0, atol=1e-9)
        assert np.array_equal(rays, angular_midpoint_rays(25))


class TestProjection:
    def test_identity_on_valid_rays(self):
        out = project_to_simplex(np.array([0.5, 0.5]))
        assert np.array_equal(out, [0.5, 0.5])

    def test_renormalizes_oversized_sum(self):
        # no clipping needed, total is 1.2, so each coordinate shrinks to 0.5
        out = project_to_simplex(np.array([0.6, 0.6]))
        assert np.allclose(out, [0.5, 0.5])

    def test_clips_negative_then_renormalizes(self):
        out = project_to_simplex(np.array([-0.2, 0.8]))
        assert np.allclose(out, [0.0, 1.0])

    def test_degenerate_all_zero_raises(self):
        with pytest.raises(ValueError):
            project_to_simplex(np.array([-1.0, -0.5]))

    def test_non_finite_raises(self):
        with pytest.raises(ValueError):
            project_to_simplex(np.array([np.nan, 0.5]))

    def test_idempotent_exactly(self):
        rng = np.random.default_rng(21)
        for _ in range(10_000):
            dim = int(rng.integers(2, 6))
            raw = rng.normal(0.0, 1.0, size=dim)
            if np.all(raw <= 0.0):
                continue  # degenerate by contract, covered separately
            once = project_to_simplex(raw)
            twice = project_to_simplex(once)
            assert np.array_equal(once, twice)
            assert is_valid_ray(once)

    def test_directional_projection_stops_at_boundary(self):
        origin = np.array([0.9, 0.1])
        step = np.array([0.3, 0.0])  # would overshoot coordinate 0 past 1.0
        out = project_to_simplex(origin + step, origin=origin)
        assert is_valid_ray(out)
        # the scaled point hits the boundary at (1.0, 0.1) and renormalizes
        assert np.allclose(out, np.array([1.0, 0.1]) / 1.1)

    def test_directional_projection_outputs_valid_rays(self):
        rng = np.random.default_rng(8)
        for _ in range(2000):
            dim = int(rng.integers(2, 6))
            origin = uniform_simplex_point(rng, dim)
            noise = rng.normal(0.0, 0.3, size=dim)
            out = project_to_simplex(origin + noise, origin=origin)
            assert is_valid_ray(out)
