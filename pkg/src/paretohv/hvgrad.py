"""Hypervolume gradients and the dynamic-weight pipeline.

The gradient of the dominated volume with respect to each point's
coordinates is computed by a per-dimension sweep: project the points
onto the remaining axes, walk them in ascending order of the swept
coordinate, and measure the lower-dimensional volume slice each point
exposes beyond the staircase built so far. Increasing a loss always
shrinks the dominated region, so every partial is non-positive.

Dynamic weights turn a batch of loss vectors into per-solution descent
weight vectors: non-dominated sorting first, then per-rank gradients
against a per-rank reference at 1.1 times the objective maxima, then
unit normalization of each negated gradient.
"""

from __future__ import annotations

import numpy as np

from .pareto import _hv2d, nondominated_sort

REFERENCE_SCALE = 1.1
REFERENCE_FLOOR = 1e-6
NORM_GUARD = 1e-8


def dynamic_reference(points: np.ndarray) -> np.ndarray:
    """Reference just outside the current points: 1.1x the per-axis maxima.

    An axis whose maximum is exactly zero keeps its reference at zero.
    Points touching such an axis then sit on the reference boundary and
    take the zero-derivative path. Anything else (for instance a tiny
    positive floor) lets a degenerate axis crush the exclusive volume
    slices of every other axis, so the unit-normalized weights point
    entirely along the dead axis and actively fight the alignment term
    that could pull a collapsed front back open. A negative maximum is
    shrunk instead of scaled so those points stay strictly inside.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    top = pts.max(axis=0)
    ref = REFERENCE_SCALE * top
    neg = top < 0.0
    if np.any(neg):
        ref[neg] = top[neg] / REFERENCE_SCALE
    return ref


def _exclusive_slice(staircase: list[np.ndarray], proj: np.ndarray, ref: np.ndarray) -> float:
    """Volume the projected point adds beyond the current staircase."""
    if ref.shape[0] == 1:
        cur = min((float(p[0]) for p in staircase), default=float(ref[0]))
        cur = min(cur, float(ref[0]))
        return max(0.0, cur - float(proj[0]))
    with_point = np.asarray(staircase + [proj])
    base = _hv2d(np.asarray(staircase), ref) if staircase else 0.0
    return _hv2d(with_point, ref) - base


def hypervolume_gradients(points: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Partial derivatives of the hypervolume w.r.t. each point coordinate.

    Requires mutually non-dominated points and two or three objectives.
    Points at or beyond the reference and exact duplicates have zero
    derivative. Points that merely share a coordinate get the one-sided
    derivative from the sweep, with ties resolved by point index.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.asarray(reference, dtype=float)
    n, dim = pts.shape
    if dim not in (2, 3):
        raise ValueError(f"gradients support 2 or 3 objectives, got {dim}")
    if ref.shape[0] != dim:
        raise ValueError("reference dimension mismatch")
    for i in range(n):
        for j in range(i + 1, n):
            le = np.all(pts[i] <= pts[j])
            ge = np.all(pts[i] >= pts[j])
            if le != ge:
                raise ValueError(f"points {i} and {j} are not mutually non-dominated")

    grads = np.zeros((n, dim))
    beyond = np.any(pts >= ref, axis=1)

    # exact duplicates keep a single sweep representative; all copies get zero
    seen: dict[bytes, int] = {}
    duplicate = np.zeros(n, dtype=bool)
    representative = np.ones(n, dtype=bool)
    for i in range(n):
        key = pts[i].tobytes()
        if key in seen:
            duplicate[i] = True
            duplicate[seen[key]] = True
            representative[i] = False
        else:
            seen[key] = i

    active = representative & ~beyond
    for axis in range(dim):
        keep = [d for d in range(dim) if d != axis]
        order = np.lexsort((np.arange(n), pts[:, axis]))
        staircase: list[np.ndarray] = []
        ref_proj = ref[keep]
        for i in order:
            if not active[i]:
                continue
            proj = pts[i, keep]
            slice_volume = _exclusive_slice(staircase, proj, ref_proj)
            if not duplicate[i]:
                grads[i, axis] = -slice_volume
            staircase.append(proj)
    return grads


def dynamic_weights(losses: np.ndarray) -> np.ndarray:
    """Per-solution unit weight vectors that point toward loss decrease.

    Rows are solutions, columns objectives. Solutions are split into
    dominance ranks; each rank gets its own dynamic reference and
    hypervolume gradients. The negated gradients are normalized to unit
    Euclidean norm; gradients with norm below the guard come back as
    all-zero rows instead of dividing by almost nothing.
    """
    pts = np.atleast_2d(np.asarray(losses, dtype=float))
    if not np.all(np.isfinite(pts)):
        raise ValueError("losses must be finite")
    n = pts.shape[0]
    weights = np.zeros_like(pts)
    for rank in nondominated_sort(pts):
        idx = np.asarray(rank, dtype=int)
        group = pts[idx]
        ref = dynamic_reference(group)
        grads = hypervolume_gradients(group, ref)
        for row, g in zip(idx, grads):
            norm = float(np.linalg.norm(g))
            if norm >= NORM_GUARD:
                weights[row] = -g / norm
    return weights
