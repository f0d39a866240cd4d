"""Monte Carlo Voronoi decomposition of the simplex, tuned by a GA.

A partition is a set of sites together with a large cloud of labeled
simulation points; each point carries the index of its nearest site.
A genetic algorithm shapes the sites so the cells hold equal point
counts, which makes one-ray-per-cell sampling cover the simplex
evenly. The finished partition is meant to be built once, serialized,
and reused for fast per-round ray sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .simplex import project_to_simplex, uniform_simplex_points

PARTITION_FILE_VERSION = 1


@dataclass
class GaConfig:
    """Settings for the partition GA.

    `num_points` is the Monte Carlo cloud size per generation and must
    be at least `num_sites`. Mutation perturbs every coordinate of a
    site with the given standard deviation; `mutation_prob` selects
    which sites of a child get perturbed at all.
    """

    dim: int
    num_sites: int
    num_points: int = 10_000
    num_generations: int = 50
    num_species: int = 10
    mutation_std: float = 0.05
    mutation_prob: float = 1.0
    tournament_size: int = 3
    seed: int = 0

    def validate(self) -> None:
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.num_sites < 1:
            raise ValueError(f"num_sites must be >= 1, got {self.num_sites}")
        if self.num_points < self.num_sites:
            raise ValueError("num_points must be >= num_sites")
        if self.num_generations < 1:
            raise ValueError("num_generations must be >= 1")
        if self.num_species < 1:
            raise ValueError("num_species must be >= 1")
        if self.mutation_std <= 0.0:
            raise ValueError("mutation_std must be positive")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")


class NearestSiteIndex:
    """Exact nearest-site queries under Euclidean distance.

    A KD-tree answers the bulk of the queries; exact distance ties are
    re-resolved by a linear scan so the lowest site index always wins,
    keeping labels deterministic.
    """

    def __init__(self, sites: np.ndarray):
        sites = np.atleast_2d(np.asarray(sites, dtype=float))
        if sites.shape[0] == 0:
            raise ValueError("need at least one site")
        self.sites = sites
        self._tree = cKDTree(sites)

    def query(self, points: np.ndarray) -> np.ndarray:
        """Index of the nearest site for each point row."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.sites.shape[1]:
            raise ValueError(
                f"dimension mismatch: points {points.shape[1]}, sites {self.sites.shape[1]}"
            )
        if self.sites.shape[0] == 1:
            return np.zeros(points.shape[0], dtype=int)
        dist, idx = self._tree.query(points, k=2)
        labels = idx[:, 0].astype(int)
        tied = dist[:, 0] == dist[:, 1]
        if np.any(tied):
            diffs = points[tied, None, :] - self.sites[None, :, :]
            labels[tied] = np.argmin((diffs**2).sum(axis=2), axis=1)
        return labels


def assign_labels(points: np.ndarray, index: NearestSiteIndex) -> np.ndarray:
    """Label each point with its nearest site index."""
    return index.query(points)


def balance_fitness(labels: np.ndarray, num_sites: int) -> float:
    """How evenly the labels spread over the cells, in (0, 1].

    One over one-plus-variance of the per-cell counts, with counts
    measured relative to the mean count so the score does not depend on
    the cloud size: exactly 1.0 when every cell holds the same number
    of points, sliding toward 0 as the counts diverge.
    """
    labels = np.asarray(labels, dtype=int)
    if labels.size and (labels.min() < 0 or labels.max() >= num_sites):
        raise ValueError("labels out of range")
    counts = np.bincount(labels, minlength=num_sites)
    mean = counts.mean()
    if mean == 0.0:
        return 1.0
    variance = float(np.mean(((counts - mean) / mean) ** 2))
    return 1.0 / (1.0 + variance)


@dataclass
class VoronoiPartition:
    """Sites plus a labeled Monte Carlo cloud over the simplex."""

    sites: np.ndarray
    points: np.ndarray
    labels: np.ndarray
    fitness: float
    seed: int
    _cells: list[np.ndarray] | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.sites.shape[1]

    @property
    def num_sites(self) -> int:
        return self.sites.shape[0]

    def cell_indices(self) -> list[np.ndarray]:
        """Point indices grouped by cell, cached after the first call."""
        if self._cells is None:
            self._cells = [
                np.nonzero(self.labels == i)[0] for i in range(self.num_sites)
            ]
        return self._cells

    def sample_rays(self, rng: np.random.Generator) -> np.ndarray:
        """One ray per cell, drawn uniformly from the cell's stored points.

        An empty cell falls back to its own site, so the output always
        has exactly one ray per cell.
        """
        rays = np.empty_like(self.sites)
        for i, members in enumerate(self.cell_indices()):
            if members.size == 0:
                rays[i] = self.sites[i]
            else:
                rays[i] = self.points[members[rng.integers(members.size)]]
        return rays

    def validate(self) -> None:
        """Re-derive labels and fitness; raise if the stored ones drift."""
        index = NearestSiteIndex(self.sites)
        expected = index.query(self.points)
        if not np.array_equal(expected, self.labels):
            raise ValueError("stored labels do not match nearest-site assignment")
        fit = balance_fitness(self.labels, self.num_sites)
        if abs(fit - self.fitness) > 1e-12:
            raise ValueError(f"stored fitness {self.fitness} != recomputed {fit}")


@dataclass
class EvolveResult:
    partition: VoronoiPartition
    best_fitness_trace: np.ndarray
    generation_best_trace: np.ndarray


def evolve(config: GaConfig) -> EvolveResult:
    """Run the partition GA and return the final best individual.

    Each generation draws a fresh Monte Carlo cloud, scores every
    individual on it, and builds the next population from the elite
    plus tournament-selected, blended, and mutated children. The elite
    is re-scored on every fresh cloud, so the per-generation trace is
    noisy; `best_fitness_trace` records the running best, which is the
    monotone quantity elitism guarantees.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    population = [
        uniform_simplex_points(rng, config.num_sites, config.dim)
        for _ in range(config.num_species)
    ]

    best_so_far = -np.inf
    best_trace = np.empty(config.num_generations)
    gen_trace = np.empty(config.num_generations)
    last_best: VoronoiPartition | None = None

    for generation in range(config.num_generations):
        cloud = uniform_simplex_points(rng, config.num_points, config.dim)
        scores = np.empty(config.num_species)
        all_labels = []
        for k, sites in enumerate(population):
            labels = NearestSiteIndex(sites).query(cloud)
            all_labels.append(labels)
            scores[k] = balance_fitness(labels, config.num_sites)
        champion = int(np.argmax(scores))
        last_best = VoronoiPartition(
            sites=population[champion].copy(),
            points=cloud,
            labels=all_labels[champion],
            fitness=float(scores[champion]),
            seed=config.seed,
        )
        gen_trace[generation] = scores[champion]
        best_so_far = max(best_so_far, float(scores[champion]))
        best_trace[generation] = best_so_far

        if generation == config.num_generations - 1:
            break
        population = _next_generation(population, scores, config, rng)

    assert last_best is not None
    return EvolveResult(last_best, best_trace, gen_trace)


def _next_generation(
    population: list[np.ndarray],
    scores: np.ndarray,
    config: GaConfig,
    rng: np.random.Generator,
) -> list[np.ndarray]:
    elite = population[int(np.argmax(scores))]
    children = [elite.copy()]
    while len(children) < config.num_species:
        mother = population[_tournament(scores, config.tournament_size, rng)]
        father = population[_tournament(scores, config.tournament_size, rng)]
        alpha = rng.uniform()
        child = alpha * mother + (1.0 - alpha) * father
        children.append(_mutate(child, config, rng))
    return children


def _tournament(scores: np.ndarray, size: int, rng: np.random.Generator) -> int:
    contenders = rng.integers(scores.size, size=size)
    return int(contenders[np.argmax(scores[contenders])])


def _mutate(child: np.ndarray, config: GaConfig, rng: np.random.Generator) -> np.ndarray:
    mutated = child.copy()
    for row in range(mutated.shape[0]):
        if config.mutation_prob < 1.0 and rng.uniform() >= config.mutation_prob:
            continue
        origin = mutated[row]
        moved = origin + rng.normal(0.0, config.mutation_std, size=origin.shape)
        mutated[row] = project_to_simplex(moved, origin=origin)
    return mutated


def save_partition(path, partition: VoronoiPartition, num_points_config: int | None = None) -> None:
    """Write the partition as a JSON document."""
    payload = {
        "version": PARTITION_FILE_VERSION,
        "J": partition.dim,
        "N": partition.num_sites,
        "M": int(num_points_config if num_points_config is not None else partition.points.shape[0]),
        "seed": partition.seed,
        "fitness": partition.fitness,
        "sites": partition.sites.tolist(),
        "points": partition.points.tolist(),
        "labels": partition.labels.tolist(),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_partition(path) -> VoronoiPartition:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != PARTITION_FILE_VERSION:
        raise ValueError(f"unsupported partition file version {payload.get('version')}")
    return VoronoiPartition(
        sites=np.asarray(payload["sites"], dtype=float),
        points=np.asarray(payload["points"], dtype=float),
        labels=np.asarray(payload["labels"], dtype=int),
        fitness=float(payload["fitness"]),
        seed=int(payload["seed"]),
    )
