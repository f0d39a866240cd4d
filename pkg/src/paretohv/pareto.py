"""Dominance relations, non-dominated sorting, and hypervolume.

All objectives are losses: lower is better, and the hypervolume of a
point set is the Lebesgue measure of the region it dominates below a
reference point. Exact sweeps cover two and three objectives; higher
dimensions fall back to an unbiased Monte Carlo estimate.
"""

from __future__ import annotations

import numpy as np

MONTE_CARLO_SAMPLES = 10_000
_SHARD_SIZE = 4096


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True when `a` is no worse than `b` everywhere and differs somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_sort(points: np.ndarray) -> list[list[int]]:
    """Split point indices into dominance ranks, rank 0 non-dominated.

    Pairwise counting, quadratic in the number of points; fine at the
    scales this library works with. Duplicate points never dominate
    each other and land in the same rank.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if n == 0:
        raise ValueError("cannot sort an empty point set")
    dominated_by = [[] for _ in range(n)]
    counts = np.zeros(n, dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            le = np.all(pts[i] <= pts[j])
            ge = np.all(pts[i] >= pts[j])
            if le and not ge:
                dominated_by[i].append(j)
                counts[j] += 1
            elif ge and not le:
                dominated_by[j].append(i)
                counts[i] += 1
    ranks = [sorted(np.nonzero(counts == 0)[0].tolist())]
    counts[counts == 0] = -1
    while True:
        nxt = []
        for i in ranks[-1]:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        if not nxt:
            break
        ranks.append(sorted(set(nxt)))
    return ranks


def _hv2d(points: np.ndarray, reference: np.ndarray) -> float:
    """Exact 2D hypervolume by a single sweep over x-sorted points."""
    pts = points[np.all(points <= reference, axis=1)]
    if pts.shape[0] == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    hv = 0.0
    cur_y = reference[1]
    for x, y in pts[order]:
        if y < cur_y:
            hv += (reference[0] - x) * (cur_y - y)
            cur_y = y
    return float(hv)


def _hv3d(points: np.ndarray, reference: np.ndarray) -> float:
    """Exact 3D hypervolume: sweep the third axis, integrate a 2D staircase.

    Points enter the cross-section in ascending third coordinate; the
    dominated area of their 2D projections is integrated over the gaps
    between consecutive levels up to the reference.
    """
    pts = points[np.all(points <= reference, axis=1)]
    if pts.shape[0] == 0:
        return 0.0
    order = np.argsort(pts[:, 2], kind="stable")
    pts = pts[order]
    volume = 0.0
    area = 0.0
    prev_z = pts[0, 2]
    staircase: list[np.ndarray] = []
    for p in pts:
        volume += area * (p[2] - prev_z)
        staircase.append(p[:2])
        area = _hv2d(np.asarray(staircase), reference[:2])
        prev_z = p[2]
    volume += area * (reference[2] - prev_z)
    return float(volume)


def hypervolume_exact(points: np.ndarray, reference: np.ndarray) -> float:
    """Exact hypervolume for two or three objectives.

    Points at or beyond the reference in any coordinate contribute
    nothing; they are tolerated rather than rejected because training
    fronts may momentarily exceed a fixed evaluation reference.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.asarray(reference, dtype=float)
    if ref.shape[0] not in (2, 3):
        raise ValueError(f"exact hypervolume supports 2 or 3 objectives, got {ref.shape[0]}")
    if pts.shape[1] != ref.shape[0]:
        raise ValueError(f"dimension mismatch: points {pts.shape[1]}, reference {ref.shape[0]}")
    pts = np.unique(pts, axis=0)
    if ref.shape[0] == 2:
        return _hv2d(pts, ref)
    return _hv3d(pts, ref)


def hypervolume_monte_carlo(
    points: np.ndarray,
    reference: np.ndarray,
    samples: int = MONTE_CARLO_SAMPLES,
    rng: np.random.Generator | None = None,
) -> float:
    """Unbiased Monte Carlo hypervolume estimate for any dimension.

    Samples are drawn uniformly from the box spanned by the
    componentwise front minimum and the reference; the dominated
    fraction scales the box volume. The tight lower corner keeps the
    estimator variance down without biasing it.

    Sampling is sharded with per-shard child generators so the estimate
    depends only on the seed schedule, not on how shards are executed.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.asarray(reference, dtype=float)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if rng is None:
        rng = np.random.default_rng()
    lower = pts.min(axis=0)
    widths = ref - lower
    if np.any(widths <= 0.0):
        # the whole front sits at or beyond the reference in some axis
        return 0.0
    box_volume = float(np.prod(widths))
    root = int(rng.integers(0, 2**63 - 1))
    n_shards = (samples + _SHARD_SIZE - 1) // _SHARD_SIZE
    seeds = np.random.SeedSequence(root).spawn(n_shards)
    hit = 0
    remaining = samples
    for seq in seeds:
        shard = min(_SHARD_SIZE, remaining)
        remaining -= shard
        draws = np.random.default_rng(seq).random((shard, ref.shape[0])) * widths + lower
        hit += int(np.any(np.all(draws[:, None, :] >= pts[None, :, :], axis=2), axis=1).sum())
    return box_volume * hit / samples


def hypervolume(
    points: np.ndarray,
    reference: np.ndarray,
    rng: np.random.Generator | None = None,
    samples: int = MONTE_CARLO_SAMPLES,
) -> float:
    """Hypervolume dispatch: exact up to three objectives, Monte Carlo above."""
    ref = np.asarray(reference, dtype=float)
    if ref.shape[0] < 2:
        raise ValueError(f"need at least 2 objectives, got {ref.shape[0]}")
    if ref.shape[0] <= 3:
        return hypervolume_exact(points, ref)
    return hypervolume_monte_carlo(points, ref, samples=samples, rng=rng)
