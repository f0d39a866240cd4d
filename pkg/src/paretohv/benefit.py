"""Benefit graphs over synthetic collaborating clients.

Each client holds a private linear-Gaussian regression dataset whose
ground-truth weights blend a shared component with a private one; the
`overlap` knob moves the population from identical tasks (1.0) to
unrelated ones (0.0). A single hypernetwork is trained over preference
rays whose coordinates weight the clients' training losses. Scanning a
finite candidate set of rays for each client's best validation
performance yields one ray per client; stacked, those rays form the
directed weighted benefit graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import ToyProblem
from .simplex import angular_grid_rays, simplex_lattice_rays
from .training import RunResult, TrainConfig, default_partition, train


@dataclass
class SyntheticClient:
    index: int
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    weights: np.ndarray

    def train_loss(self, theta: np.ndarray) -> float:
        return float(np.mean((self.x_train @ theta - self.y_train) ** 2))

    def val_loss(self, theta: np.ndarray) -> float:
        return float(np.mean((self.x_val @ theta - self.y_val) ** 2))


@dataclass
class BenefitGraph:
    """Row i is the preference ray that maximizes client i's validation score."""

    matrix: np.ndarray
    chosen: np.ndarray  # candidate index per client
    candidates: np.ndarray

    def row_argmaxes(self) -> np.ndarray:
        return np.argmax(self.matrix, axis=1)

    def to_csv(self) -> str:
        n = self.matrix.shape[0]
        lines = ["client," + ",".join(f"client_{j}" for j in range(n))]
        for i in range(n):
            lines.append(f"client_{i}," + ",".join(repr(v) for v in self.matrix[i]))
        return "\n".join(lines) + "\n"


def generate_clients(
    count: int,
    overlap: float,
    samples: int = 64,
    features: int = 5,
    noise: float = 0.1,
    seed: int = 0,
) -> list[SyntheticClient]:
    """Deterministic linear-Gaussian clients with controllable similarity.

    Client i's true weights are overlap * shared + (1 - overlap) *
    private_i, with the shared and private directions unit-norm. Train
    and validation splits are drawn separately, so they are disjoint.
    """
    if count < 2:
        raise ValueError(f"need at least 2 clients, got {count}")
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must be in [0, 1]")
    rng = np.random.default_rng(seed)
    shared = _unit(rng.normal(size=features))
    clients = []
    val_samples = max(16, samples // 2)
    for i in range(count):
        private = _unit(rng.normal(size=features))
        w = overlap * shared + (1.0 - overlap) * private
        x_train = rng.normal(size=(samples, features))
        y_train = x_train @ w + noise * rng.normal(size=samples)
        x_val = rng.normal(size=(val_samples, features))
        y_val = x_val @ w + noise * rng.normal(size=val_samples)
        clients.append(SyntheticClient(i, x_train, y_train, x_val, y_val, w))
    return clients


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def client_problem(clients: list[SyntheticClient]) -> ToyProblem:
    """Wrap per-client training MSEs as a multi-objective problem."""
    features = clients[0].x_train.shape[1]

    def batch(thetas: np.ndarray) -> np.ndarray:
        cols = []
        for c in clients:
            residual = thetas @ c.x_train.T - c.y_train
            cols.append(np.mean(residual**2, axis=1))
        return np.stack(cols, axis=1)

    def pullback(thetas: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(thetas)
        for j, c in enumerate(clients):
            residual = thetas @ c.x_train.T - c.y_train
            grad += upstream[:, [j]] * (2.0 / c.x_train.shape[0]) * (residual @ c.x_train)
        return grad

    return ToyProblem(
        name=f"clients-{len(clients)}",
        dim=features,
        n_objectives=len(clients),
        bounds=None,
        _batch=batch,
        _pullback=pullback,
    )


def train_shared_hypernet(
    clients: list[SyntheticClient], config: TrainConfig | None = None
) -> tuple[RunResult, ToyProblem]:
    """Train one hypernetwork over all clients' losses.

    The default solver is linear scalarization for every client count:
    its rays carry importance semantics (a high coordinate asks for a
    low loss on that client), which is what reading graph rows as
    contribution weights assumes. The alignment-penalty solvers use the
    opposite ray-as-direction convention, and exact hypervolume
    gradients stop at three objectives anyway; pass a config to opt in.
    """
    n = len(clients)
    if config is None:
        config = TrainConfig(problem=f"clients-{n}", solver="ls", iterations=1500)
    problem = client_problem(clients)
    result = train(config, problem=problem)
    return result, problem


def default_candidate_rays(
    n: int,
    eval_rays: int = 25,
    partition_seed: int = 0,
    partition_points: int = 20_000,
    partition_generations: int = 40,
) -> np.ndarray:
    """Evaluation rays for the dimension plus the unit-corner rays."""
    if n == 2:
        base = angular_grid_rays(eval_rays)
    else:
        base = simplex_lattice_rays(n, eval_rays)
    return np.vstack([base, np.eye(n)])


def compute_benefit_graph(
    net_predict, clients: list[SyntheticClient], candidate_rays: np.ndarray
) -> BenefitGraph:
    """Pick each client's best candidate ray by validation performance.

    `net_predict` maps a batch of rays to decision vectors (a trained
    HyperNet's `predict`). Performance is the negated validation MSE;
    ties go to the lowest candidate index.
    """
    candidates = np.atleast_2d(np.asarray(candidate_rays, dtype=float))
    decisions = net_predict(candidates)
    n = len(clients)
    chosen = np.empty(n, dtype=int)
    rows = np.empty((n, candidates.shape[1]))
    for i, client in enumerate(clients):
        residual = decisions @ client.x_val.T - client.y_val
        performance = -np.mean(residual**2, axis=1)
        best = int(np.argmax(performance))
        chosen[i] = best
        rows[i] = candidates[best]
    return BenefitGraph(matrix=rows, chosen=chosen, candidates=candidates)
