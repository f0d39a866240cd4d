"""Geometry primitives on the unit simplex.

Preference rays live on the hyperplane where the coordinates are
non-negative and sum to one. This module provides uniform sampling,
the two-objective angular partition sampler, and the boundary
projection used after genetic mutation.
"""

from __future__ import annotations

import numpy as np

RAY_ATOL = 1e-9


def is_valid_ray(point: np.ndarray, atol: float = RAY_ATOL) -> bool:
    """True when every coordinate is in [0, 1] and the sum is 1 within atol."""
    point = np.asarray(point, dtype=float)
    if point.ndim != 1 or point.size < 2:
        return False
    if not np.all(np.isfinite(point)):
        return False
    if point.min() < 0.0 or point.max() > 1.0:
        return False
    return abs(float(point.sum()) - 1.0) <= atol


def uniform_simplex_points(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Draw `count` points uniformly from the (dim-1)-simplex.

    Normalized independent standard-exponential draws give the flat
    Dirichlet law, which is the uniform distribution on the simplex.
    """
    if dim < 2:
        raise ValueError(f"simplex dimension must be >= 2, got {dim}")
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    draws = rng.standard_exponential(size=(count, dim))
    return draws / draws.sum(axis=1, keepdims=True)


def uniform_simplex_point(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Draw a single point uniformly from the (dim-1)-simplex."""
    return uniform_simplex_points(rng, 1, dim)[0]


def sample_angular_rays(count: int, rng: np.random.Generator) -> np.ndarray:
    """Sample one two-objective ray per angular cell of the first quadrant.

    The quadrant [0, pi/2) is split into `count` equal arcs; cell i
    contributes one angle drawn uniformly from its arc, mapped to a ray
    by L1-normalizing (cos, sin). Rays come back sorted by first
    coordinate descending because the angles increase across cells.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    edges = np.linspace(0.0, np.pi / 2.0, count + 1)
    angles = rng.uniform(edges[:-1], edges[1:])
    return _rays_from_angles(angles)


def angular_midpoint_rays(count: int) -> np.ndarray:
    """Deterministic two-objective rays at the midpoints of `count` equal arcs."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    angles = (np.arange(count) + 0.5) * (np.pi / 2.0) / count
    return _rays_from_angles(angles)


def angular_grid_rays(count: int) -> np.ndarray:
    """Deterministic two-objective rays at evenly spaced angles, corners included.

    The first and last rays are exactly (1, 0) and (0, 1); evaluation
    protocols use this grid so a well-trained front can reach the
    endpoints of the true front.
    """
    if count < 2:
        raise ValueError(f"count must be >= 2, got {count}")
    angles = np.linspace(0.0, np.pi / 2.0, count)
    return _rays_from_angles(angles)


def _rays_from_angles(angles: np.ndarray) -> np.ndarray:
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return directions / directions.sum(axis=1, keepdims=True)


def simplex_lattice_rays(dim: int, min_count: int) -> np.ndarray:
    """The smallest complete simplex lattice with at least `min_count` rays.

    Rays are all compositions (i_1/H, ..., i_dim/H) with the i_k summing
    to H, for the minimal resolution H that reaches the requested count.
    The lattice covers corners and edges, so evaluation fronts can reach
    the boundary of the true front.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    resolution = 1
    while _lattice_size(resolution, dim) < min_count:
        resolution += 1
    rays = np.asarray(list(_compositions(resolution, dim)), dtype=float) / resolution
    return rays


def _lattice_size(resolution: int, dim: int) -> int:
    from math import comb

    return comb(resolution + dim - 1, dim - 1)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head, *rest)


def project_to_simplex(point: np.ndarray, origin: np.ndarray | None = None) -> np.ndarray:
    """Map an arbitrary finite point back onto the unit simplex.

    Valid rays pass through unchanged, which makes the projection
    exactly idempotent. When `origin` (the pre-mutation ray) is given,
    the mutation step is rescaled so the point stops at the nearest
    violated [0, 1] boundary before renormalizing; otherwise the
    coordinates are clipped. Renormalization restores the unit sum.

    Raises:
        ValueError: non-finite input, or a point that collapses to the
            all-zero vector after clipping.
    """
    x = np.asarray(point, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("point must be finite")
    if x.min() >= 0.0 and x.max() <= 1.0 and abs(float(x.sum()) - 1.0) <= RAY_ATOL:
        return x.copy()

    if origin is not None:
        base = np.asarray(origin, dtype=float)
        step = x - base
        scale = 1.0
        for k in range(x.size):
            if step[k] == 0.0:
                continue
            if x[k] > 1.0:
                scale = min(scale, (1.0 - base[k]) / step[k])
            elif x[k] < 0.0:
                scale = min(scale, (0.0 - base[k]) / step[k])
        x = base + max(scale, 0.0) * step

    x = np.clip(x, 0.0, 1.0)
    total = float(x.sum())
    if total <= 0.0:
        raise ValueError("degenerate input: all coordinates clip to zero")
    return x / total
