"""Pareto front learning with hypervolume maximization and Voronoi sampling."""

from .benefit import (
    BenefitGraph,
    SyntheticClient,
    compute_benefit_graph,
    default_candidate_rays,
    generate_clients,
    train_shared_hypernet,
)
from .hvgrad import dynamic_reference, dynamic_weights, hypervolume_gradients
from .hypernet import HyperNet, TrainingDiverged, load_checkpoint, save_checkpoint
from .pareto import (
    dominates,
    hypervolume,
    hypervolume_exact,
    hypervolume_monte_carlo,
    nondominated_sort,
)
from .problems import BENCH_SUITE, PROBLEM_NAMES, ToyProblem, get_problem, squash_to_bounds
from .simplex import (
    angular_grid_rays,
    angular_midpoint_rays,
    is_valid_ray,
    project_to_simplex,
    sample_angular_rays,
    simplex_lattice_rays,
    uniform_simplex_point,
    uniform_simplex_points,
)
from .training import (
    SOLVERS,
    RunResult,
    TrainConfig,
    evaluate_front,
    penalty_distance,
    penalty_gradient,
    train,
    train_step,
    upstream_columns,
)
from .voronoi import (
    GaConfig,
    NearestSiteIndex,
    VoronoiPartition,
    assign_labels,
    balance_fitness,
    evolve,
    load_partition,
    save_partition,
)

__version__ = "0.1.0"

__all__ = [
    "BENCH_SUITE",
    "BenefitGraph",
    "GaConfig",
    "HyperNet",
    "NearestSiteIndex",
    "PROBLEM_NAMES",
    "RunResult",
    "SOLVERS",
    "SyntheticClient",
    "ToyProblem",
    "TrainConfig",
    "TrainingDiverged",
    "VoronoiPartition",
    "angular_grid_rays",
    "angular_midpoint_rays",
    "assign_labels",
    "balance_fitness",
    "compute_benefit_graph",
    "default_candidate_rays",
    "dominates",
    "dynamic_reference",
    "dynamic_weights",
    "evaluate_front",
    "evolve",
    "generate_clients",
    "get_problem",
    "hypervolume",
    "hypervolume_exact",
    "hypervolume_gradients",
    "hypervolume_monte_carlo",
    "is_valid_ray",
    "load_checkpoint",
    "load_partition",
    "nondominated_sort",
    "penalty_distance",
    "penalty_gradient",
    "project_to_simplex",
    "sample_angular_rays",
    "simplex_lattice_rays",
    "save_checkpoint",
    "save_partition",
    "squash_to_bounds",
    "train",
    "train_shared_hypernet",
    "train_step",
    "uniform_simplex_point",
    "uniform_simplex_points",
    "upstream_columns",
]
