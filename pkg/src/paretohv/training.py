"""Training loops for Pareto front learning.

One hypernetwork is trained so that feeding it a preference ray yields
a decision whose loss vector sits on the Pareto front near that ray's
trade-off. Five solvers share the loop and differ only in the
per-solution upstream gradient applied to the loss matrix:

- hvvs: hypervolume dynamic weights plus a ray-alignment distance
  penalty, the headline method
- ls: linear scalarization by the ray
- tche: Tchebycheff scalarization (max of ray-weighted losses)
- cosmos: linear scalarization minus a cosine-alignment bonus
- hvi: hypervolume dynamic weights plus the cosine-alignment bonus

Two-objective runs sample rays from the angular partition; three and
more objectives sample from a Voronoi partition of the simplex that is
built once and reused. Evaluation is a fixed protocol: 25 deterministic
rays, the fixed reference point, hypervolume computed once at the end.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import pareto
from .hvgrad import dynamic_weights
from .hypernet import Adam, HyperNet, TrainingDiverged, make_optimizer
from .problems import ToyProblem, get_problem
from .simplex import (
    angular_grid_rays,
    sample_angular_rays,
    simplex_lattice_rays,
    uniform_simplex_points,
)
from .voronoi import GaConfig, VoronoiPartition, evolve, load_partition

SOLVERS = ("hvvs", "ls", "tche", "cosmos", "hvi")

# Voronoi partitions are deterministic in their config, so identical
# training runs can share one build within a process.
_PARTITION_CACHE: dict[tuple, VoronoiPartition] = {}


@dataclass
class TrainConfig:
    """Everything a training run needs; defaults give desk-scale runs."""

    problem: str
    solver: str = "hvvs"
    rays_per_step: int | None = None  # 8 for two objectives, 16 above
    penalty_weight: float = 1.0
    learning_rate: float = 1e-3
    iterations: int = 3000
    seed: int = 0
    optimizer: str = "adam"
    hidden_width: int = 100
    eval_rays: int = 25
    eval_reference: tuple[float, ...] | None = None  # default: 2.0 per objective
    partition_path: str | None = None
    partition_seed: int = 0
    partition_points: int = 20_000
    partition_generations: int = 40
    ray_distribution: str = "partition"  # or "dirichlet"
    literal_penalty_sign: bool = False

    def validate(self) -> None:
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; known: {', '.join(SOLVERS)}")
        if self.penalty_weight < 0.0:
            raise ValueError("penalty_weight must be >= 0")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.rays_per_step is not None and self.rays_per_step < 1:
            raise ValueError("rays_per_step must be >= 1")
        if self.eval_rays < 1:
            raise ValueError("eval_rays must be >= 1")
        if self.ray_distribution not in ("partition", "dirichlet"):
            raise ValueError("ray_distribution must be 'partition' or 'dirichlet'")

    def resolved_rays_per_step(self, n_objectives: int) -> int:
        if self.rays_per_step is not None:
            return self.rays_per_step
        return 8 if n_objectives == 2 else 16

    def resolved_reference(self, n_objectives: int) -> np.ndarray:
        if self.eval_reference is not None:
            ref = np.asarray(self.eval_reference, dtype=float)
            if ref.shape[0] != n_objectives:
                raise ValueError("eval_reference dimension mismatch")
            return ref
        return np.full(n_objectives, 2.0)


@dataclass
class RunResult:
    """Outcome of one training run, serializable and replayable."""

    config: dict
    seed: int
    hypervolume: float
    eval_rays: np.ndarray
    eval_losses: np.ndarray
    trace: np.ndarray
    runtime_seconds: float
    parameters: np.ndarray = field(repr=False)

    def to_payload(self) -> dict:
        """JSON-ready dict; excludes wall-clock time so reruns match byte-for-byte."""
        return {
            "config": self.config,
            "seed": self.seed,
            "hypervolume": self.hypervolume,
            "eval_rays": self.eval_rays.tolist(),
            "eval_losses": self.eval_losses.tolist(),
            "trace": self.trace.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def front_csv(self) -> str:
        """Front table with the documented ray_*/loss_* header."""
        dim_r = self.eval_rays.shape[1]
        dim_l = self.eval_losses.shape[1]
        header = [f"ray_{j}" for j in range(dim_r)] + [f"loss_{j}" for j in range(dim_l)]
        lines = [",".join(header)]
        for ray, loss in zip(self.eval_rays, self.eval_losses):
            lines.append(",".join(repr(v) for v in [*ray, *loss]))
        return "\n".join(lines) + "\n"


def penalty_distance(ray: np.ndarray, losses: np.ndarray) -> float:
    """Distance from the loss vector to the diagonal line through the ray.

    The line runs through the ray in the all-ones direction, so the
    distance vanishes exactly when the losses sit on the ray's
    trade-off direction up to a uniform shift.
    """
    ray = np.asarray(ray, dtype=float)
    losses = np.asarray(losses, dtype=float)
    if ray.shape != losses.shape:
        raise ValueError("ray and losses must have the same dimension")
    diff = losses - ray
    t = diff.mean()
    return float(np.linalg.norm(diff - t))


def penalty_gradient(ray: np.ndarray, losses: np.ndarray) -> np.ndarray:
    """Gradient of `penalty_distance` w.r.t. the losses; zeros on the line."""
    ray = np.asarray(ray, dtype=float)
    losses = np.asarray(losses, dtype=float)
    diff = losses - ray
    residual = diff - diff.mean()
    dist = float(np.linalg.norm(residual))
    if dist <= 1e-12:
        return np.zeros_like(losses)
    return residual / dist


def cosine_gradient(ray: np.ndarray, losses: np.ndarray) -> np.ndarray:
    """Gradient of cos(ray, losses) w.r.t. the losses."""
    ray = np.asarray(ray, dtype=float)
    losses = np.asarray(losses, dtype=float)
    nr = float(np.linalg.norm(ray))
    nl = float(np.linalg.norm(losses))
    if nr == 0.0 or nl == 0.0:
        return np.zeros_like(losses)
    cos = float(ray @ losses) / (nr * nl)
    return ray / (nr * nl) - cos * losses / nl**2


def upstream_columns(
    solver: str,
    rays: np.ndarray,
    losses: np.ndarray,
    penalty_weight: float,
    literal_penalty_sign: bool = False,
) -> np.ndarray:
    """Per-solution gradients of the solver objective w.r.t. the losses.

    Rows are solutions. Every solver is written in descent form: the
    training step moves parameters against these directions chained
    through the loss and network Jacobians.
    """
    rays = np.atleast_2d(np.asarray(rays, dtype=float))
    losses = np.atleast_2d(np.asarray(losses, dtype=float))
    n = rays.shape[0]
    out = np.zeros_like(losses)
    penalty_sign = -1.0 if literal_penalty_sign else 1.0

    if solver == "ls":
        return rays.copy()
    if solver == "tche":
        active = np.argmax(rays * losses, axis=1)
        out[np.arange(n), active] = rays[np.arange(n), active]
        return out
    if solver == "cosmos":
        for i in range(n):
            out[i] = rays[i] - penalty_weight * cosine_gradient(rays[i], losses[i])
        return out
    if solver == "hvvs":
        weights = dynamic_weights(losses)
        for i in range(n):
            out[i] = weights[i] + penalty_sign * penalty_weight * penalty_gradient(
                rays[i], losses[i]
            )
        return out
    if solver == "hvi":
        weights = dynamic_weights(losses)
        for i in range(n):
            out[i] = weights[i] - penalty_weight * cosine_gradient(rays[i], losses[i])
        return out
    raise ValueError(f"unknown solver {solver!r}")


def default_partition(
    dim: int,
    num_sites: int,
    seed: int = 0,
    num_points: int = 20_000,
    num_generations: int = 40,
) -> VoronoiPartition:
    """Build (or fetch from the process cache) a reusable partition."""
    key = (dim, num_sites, seed, num_points, num_generations)
    if key not in _PARTITION_CACHE:
        config = GaConfig(
            dim=dim,
            num_sites=num_sites,
            num_points=num_points,
            num_generations=num_generations,
            seed=seed,
        )
        _PARTITION_CACHE[key] = evolve(config).partition
    return _PARTITION_CACHE[key]


def _sample_rays(
    config: TrainConfig,
    n_objectives: int,
    count: int,
    partition: VoronoiPartition | None,
    rng: np.random.Generator,
) -> np.ndarray:
    if config.ray_distribution == "dirichlet":
        return uniform_simplex_points(rng, count, n_objectives)
    if n_objectives == 2:
        return sample_angular_rays(count, rng)
    assert partition is not None
    return partition.sample_rays(rng)


def train_step(
    net: HyperNet,
    problem: ToyProblem,
    config: TrainConfig,
    optimizer,
    partition: VoronoiPartition | None,
    rng: np.random.Generator,
    iteration: int = 0,
    rays: np.ndarray | None = None,
) -> np.ndarray:
    """One optimization step; returns the step's loss matrix (rays x objectives)."""
    count = config.resolved_rays_per_step(problem.n_objectives)
    if rays is None:
        rays = _sample_rays(config, problem.n_objectives, count, partition, rng)
    decisions = net.forward(rays)
    losses = problem.evaluate_batch(decisions)
    if not np.all(np.isfinite(losses)):
        raise TrainingDiverged("non-finite loss", iteration=iteration)
    upstream = upstream_columns(
        config.solver, rays, losses, config.penalty_weight, config.literal_penalty_sign
    )
    decision_grad = problem.pullback(decisions, upstream)
    net.backward(decision_grad)
    try:
        optimizer.step(net, net.take_grad(), config.learning_rate)
    except TrainingDiverged as exc:
        raise TrainingDiverged(str(exc), iteration=iteration) from None
    return losses


def evaluation_rays(config: TrainConfig, n_objectives: int) -> np.ndarray:
    """The deterministic evaluation rays.

    Two objectives use the corner-inclusive angular grid; more use the
    smallest complete simplex lattice holding the requested count, so
    the protocol reaches the boundary of the simplex in any dimension.
    """
    if n_objectives == 2:
        return angular_grid_rays(config.eval_rays)
    return simplex_lattice_rays(n_objectives, config.eval_rays)


def evaluate_front(
    net: HyperNet,
    problem: ToyProblem,
    reference: np.ndarray,
    rays: np.ndarray,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, float]:
    """Losses at the given rays and their hypervolume at the reference."""
    decisions = net.predict(rays)
    losses = problem.evaluate_batch(decisions)
    hv = pareto.hypervolume(losses, reference, rng=rng)
    return losses, hv


def train(
    config: TrainConfig,
    problem: ToyProblem | None = None,
    partition: VoronoiPartition | None = None,
) -> RunResult:
    """Run the full loop for `config` and evaluate the final front."""
    config.validate()
    if problem is None:
        problem = get_problem(config.problem)
    reference = config.resolved_reference(problem.n_objectives)
    rng = np.random.default_rng(config.seed)
    net = HyperNet(
        problem.n_objectives,
        problem.dim,
        rng=rng,
        hidden=config.hidden_width,
        bounds=problem.bounds,
    )
    optimizer = make_optimizer(config.optimizer)

    needs_partition = (
        problem.n_objectives >= 3 and config.ray_distribution == "partition"
    )
    if needs_partition and partition is None:
        if config.partition_path is not None:
            partition = load_partition(config.partition_path)
        else:
            partition = default_partition(
                problem.n_objectives,
                config.resolved_rays_per_step(problem.n_objectives),
                seed=config.partition_seed,
                num_points=config.partition_points,
                num_generations=config.partition_generations,
            )
    if partition is not None and partition.dim != problem.n_objectives:
        raise ValueError("partition dimension does not match the problem")

    start = time.perf_counter()
    trace = np.empty(config.iterations)
    trace_rng = np.random.default_rng(config.seed + 1)
    for iteration in range(config.iterations):
        losses = train_step(net, problem, config, optimizer, partition, rng, iteration)
        if problem.n_objectives <= 3:
            trace[iteration] = pareto.hypervolume_exact(losses, reference)
        else:
            trace[iteration] = pareto.hypervolume_monte_carlo(
                losses, reference, samples=2048, rng=trace_rng
            )

    rays = evaluation_rays(config, problem.n_objectives)
    eval_rng = np.random.default_rng(config.seed + 2)
    eval_losses, hv = evaluate_front(net, problem, reference, rays, rng=eval_rng)
    runtime = time.perf_counter() - start

    config_echo = asdict(config)
    config_echo["eval_reference"] = reference.tolist()
    config_echo["rays_per_step"] = config.resolved_rays_per_step(problem.n_objectives)
    return RunResult(
        config=config_echo,
        seed=config.seed,
        hypervolume=hv,
        eval_rays=rays,
        eval_losses=eval_losses,
        trace=trace,
        runtime_seconds=runtime,
        parameters=net.get_params(),
    )
