"""Toy multi-objective benchmark problems.

Eight small minimization problems with two or three objectives, the
standard testbed for Pareto front learning at desk scale:

- pro1: scalar decision, parabola pair, convex front
- pro2: 100-dimensional exponential pair, concave front
- dtlz2 / dtlz4: three objectives on the unit-sphere octant front
- zdt1 / zdt2: the classic convex and concave two-objective problems
- vlmop1: quadratic pair in 30 dimensions, convex front
- vlmop2-printed / vlmop2-canonical: two readings of the VLMOP2
  benchmark; the printed variant repeats the vlmop1 quadratics with
  n=10 and box bounds, the canonical one is the exponential pair

References:
    Zitzler, Deb & Thiele (2000). Comparison of multiobjective
    evolutionary algorithms: Empirical results.
    Van Veldhuizen & Lamont (1999). Multiobjective evolutionary
    algorithm test suites.

Bounded problems are paired with a logistic squash so a network can
emit unconstrained values; unbounded problems take raw outputs.
Gradients are closed-form where the calculus is short and come from
the autodiff engine otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .autodiff import Tensor


@dataclass
class ToyProblem:
    """A benchmark problem: losses, loss gradients, and bound handling.

    `evaluate_batch` maps decision rows to loss rows. `pullback` is the
    training workhorse: given decisions and per-loss upstream weights it
    returns the gradient of the weighted loss sum w.r.t. each decision.
    """

    name: str
    dim: int
    n_objectives: int
    bounds: tuple[float, float] | None
    _batch: Callable[[np.ndarray], np.ndarray]
    _pullback: Callable[[np.ndarray, np.ndarray], np.ndarray]
    _max_hv: Callable[[np.ndarray], float | None] = field(default=lambda ref: None)

    def _check_bounds(self, thetas: np.ndarray) -> None:
        if self.bounds is None:
            return
        lo, hi = self.bounds
        if thetas.min() < lo - 1e-12 or thetas.max() > hi + 1e-12:
            raise ValueError(f"{self.name}: decision outside bounds [{lo}, {hi}]")

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        """Loss vector at a single decision."""
        return self.evaluate_batch(np.asarray(theta, dtype=float)[None, :])[0]

    def evaluate_batch(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if thetas.shape[1] != self.dim:
            raise ValueError(f"{self.name}: expected decisions of dimension {self.dim}")
        self._check_bounds(thetas)
        return self._batch(thetas)

    def pullback(self, thetas: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        """Gradient of sum_ij upstream[i,j] * loss_j(theta_i) w.r.t. thetas."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
        self._check_bounds(thetas)
        return self._pullback(thetas, upstream)

    def gradient(self, theta: np.ndarray, objective: int) -> np.ndarray:
        """d loss_j / d theta at one decision."""
        one_hot = np.zeros((1, self.n_objectives))
        one_hot[0, objective] = 1.0
        return self.pullback(np.asarray(theta, dtype=float)[None, :], one_hot)[0]

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        return np.stack([self.gradient(theta, j) for j in range(self.n_objectives)])

    def squash(self, raw: np.ndarray) -> np.ndarray:
        return squash_to_bounds(self.bounds, raw)

    def max_hypervolume(self, reference: np.ndarray) -> float | None:
        """Analytic hypervolume of the continuum front, where derivable."""
        return self._max_hv(np.asarray(reference, dtype=float))


def squash_to_bounds(bounds: tuple[float, float] | None, raw: np.ndarray) -> np.ndarray:
    """Logistic map onto the bound interval; identity when unbounded."""
    raw = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(raw)):
        raise ValueError("raw values must be finite")
    if bounds is None:
        return raw.copy()
    lo, hi = bounds
    return lo + (hi - lo) / (1.0 + np.exp(-raw))


def _tape_problem(name, dim, n_objectives, bounds, builder, max_hv=None):
    """Wire a Tensor-graph loss builder into a ToyProblem."""

    def batch(thetas):
        return np.stack([loss.data for loss in builder(Tensor(thetas))], axis=1)

    def pullback(thetas, upstream):
        t = Tensor(thetas)
        losses = builder(t)
        total = losses[0] * upstream[:, 0]
        for j in range(1, len(losses)):
            total = total + losses[j] * upstream[:, j]
        total.sum().backward()
        return t.grad

    return ToyProblem(
        name, dim, n_objectives, bounds, batch, pullback, max_hv or (lambda ref: None)
    )


# -- analytic problems --------------------------------------------------


def _pro1_max_hv(ref):
    # front l2 = (1 - sqrt(l1))^2 on [0, 1]; closed-form dominated area
    if ref.shape[0] == 2 and np.allclose(ref, [2.0, 2.0]):
        return 23.0 / 6.0
    return None


def _make_pro1():
    def batch(thetas):
        t = thetas[:, 0]
        return np.stack([t**2, (t - 1.0) ** 2], axis=1)

    def pullback(thetas, upstream):
        t = thetas[:, 0]
        grad = upstream[:, 0] * 2.0 * t + upstream[:, 1] * 2.0 * (t - 1.0)
        return grad[:, None]

    return ToyProblem("pro1", 1, 2, None, batch, pullback, _pro1_max_hv)


def _make_exponential_pair(name, dim):
    """1 - exp(-||theta -/+ 1/sqrt(d)||^2): pro2 and canonical vlmop2."""
    offset = 1.0 / np.sqrt(dim)
    bounds = None if name == "pro2" else (-2.0, 2.0)

    def batch(thetas):
        s1 = ((thetas - offset) ** 2).sum(axis=1)
        s2 = ((thetas + offset) ** 2).sum(axis=1)
        return np.stack([1.0 - np.exp(-s1), 1.0 - np.exp(-s2)], axis=1)

    def pullback(thetas, upstream):
        s1 = ((thetas - offset) ** 2).sum(axis=1)
        s2 = ((thetas + offset) ** 2).sum(axis=1)
        g1 = np.exp(-s1)[:, None] * 2.0 * (thetas - offset)
        g2 = np.exp(-s2)[:, None] * 2.0 * (thetas + offset)
        return upstream[:, [0]] * g1 + upstream[:, [1]] * g2

    return ToyProblem(name, dim, 2, bounds, batch, pullback)


def _make_quadratic_pair(name, dim, bounds):
    """||theta||^2 / 4n against ||theta - 2||^2 / 4n: vlmop1 and printed vlmop2."""
    scale = 1.0 / (4.0 * dim)

    def batch(thetas):
        l1 = scale * (thetas**2).sum(axis=1)
        l2 = scale * ((thetas - 2.0) ** 2).sum(axis=1)
        return np.stack([l1, l2], axis=1)

    def pullback(thetas, upstream):
        g1 = 2.0 * scale * thetas
        g2 = 2.0 * scale * (thetas - 2.0)
        return upstream[:, [0]] * g1 + upstream[:, [1]] * g2

    return ToyProblem(name, dim, 2, bounds, batch, pullback)


# -- tape-differentiated problems ---------------------------------------


def _dtlz_builder(power: float | None):
    # the alpha power maps only the two position coordinates; the tail
    # distance term is the plain squared offset from 0.5
    half_pi = np.pi / 2.0

    def build(theta: Tensor):
        spread = (((theta[:, 2:] - 0.5) ** 2).sum(axis=1)) + 1.0
        pos1 = theta[:, 0] if power is None else theta[:, 0] ** power
        pos2 = theta[:, 1] if power is None else theta[:, 1] ** power
        a1 = pos1 * half_pi
        a2 = pos2 * half_pi
        l1 = a1.cos() * a2.cos() * spread
        l2 = a1.cos() * a2.sin() * spread
        l3 = a1.sin() * spread
        return [l1, l2, l3]

    return build


def _dtlz2_max_hv(ref):
    # front is the unit-sphere octant: dominated iff the norm reaches 1
    if ref.shape[0] == 3 and np.allclose(ref, [2.0, 2.0, 2.0]):
        return 8.0 - np.pi / 6.0
    return None


def _zdt_builder(dim: int, concave: bool):
    def build(theta: Tensor):
        l1 = theta[:, 0]
        g = theta[:, 1:].sum(axis=1) * (9.0 / (dim - 1)) + 1.0
        # g * h with h = 1 - (l1/g)^2 (concave) or 1 - sqrt(l1/g) (convex)
        if concave:
            l2 = g - l1**2 / g
        else:
            l2 = g - (l1 * g).sqrt()
        return [l1, l2]

    return build


_REGISTRY: dict[str, Callable[[], ToyProblem]] = {
    "pro1": _make_pro1,
    "pro2": lambda: _make_exponential_pair("pro2", 100),
    "dtlz2": lambda: _tape_problem("dtlz2", 10, 3, (0.0, 1.0), _dtlz_builder(None), _dtlz2_max_hv),
    "dtlz4": lambda: _tape_problem("dtlz4", 10, 3, (0.0, 1.0), _dtlz_builder(100.0)),
    "zdt1": lambda: _tape_problem("zdt1", 2, 2, (0.0, 1.0), _zdt_builder(2, concave=False)),
    "zdt2": lambda: _tape_problem("zdt2", 2, 2, (0.0, 1.0), _zdt_builder(2, concave=True)),
    "vlmop1": lambda: _make_quadratic_pair("vlmop1", 30, None),
    "vlmop2-printed": lambda: _make_quadratic_pair("vlmop2-printed", 10, (-2.0, 2.0)),
    "vlmop2-canonical": lambda: _make_exponential_pair("vlmop2-canonical", 10),
}

PROBLEM_NAMES = tuple(_REGISTRY)
BENCH_SUITE = (
    "pro1",
    "pro2",
    "dtlz2",
    "dtlz4",
    "zdt1",
    "zdt2",
    "vlmop1",
    "vlmop2-printed",
)


def get_problem(name: str) -> ToyProblem:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; known: {', '.join(PROBLEM_NAMES)}") from None
    return factory()
