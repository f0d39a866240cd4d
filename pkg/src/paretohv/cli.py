"""Command-line interface.

Commands:
    voronoi        build a GA-optimized simplex partition and save it
    train          train one hypernetwork run and save its results
    bench          run the benchmark table across problems and seeds
    benefit-graph  train over synthetic clients and export the graph
    eval           re-evaluate a saved checkpoint

Every command honors --seed and writes a manifest echoing the resolved
configuration, so re-running a manifest reproduces the result payloads
byte for byte. PHN_OUT_DIR sets the default output root.

Exit codes: 0 success, 2 usage error, 3 benchmark floor violation,
4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import benefit
from .hypernet import HyperNet, load_checkpoint, save_checkpoint
from .problems import BENCH_SUITE, PROBLEM_NAMES, get_problem
from .training import (
    SOLVERS,
    RunResult,
    TrainConfig,
    evaluate_front,
    evaluation_rays,
    train,
)
from .voronoi import GaConfig, evolve, save_partition

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FLOOR = 3
EXIT_IO = 4

# Benchmark floors for the headline solver at default settings; bench
# exits nonzero when a mean falls below its floor.
HV_FLOORS = {
    "pro1": 3.80,
    "pro2": 3.30,
    "dtlz2": 7.25,
    "dtlz4": 7.20,
    "zdt1": 3.60,
    "zdt2": 3.25,
    "vlmop1": 3.75,
    "vlmop2-printed": 3.25,
}


def default_out_root() -> Path:
    return Path(os.environ.get("PHN_OUT_DIR", "phn-out"))


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _IoFailure(f"cannot write {path}: {exc}") from exc


class _IoFailure(Exception):
    pass


def _write_manifest(out_dir: Path, command: str, config: dict, seed: int,
                    config_file: str | None = None) -> None:
    manifest = {
        "command": command,
        "config_file": config_file,
        "config": config,
        "out_dir": str(out_dir),
        "seed": seed,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    _write_text(out_dir / "manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _load_manifest(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise _IoFailure(f"cannot read manifest {path}: {exc}") from exc


def _load_config_file(path: str, section: str) -> dict:
    """Flat key=value config with sections; unknown keys are rejected later."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise _IoFailure(f"cannot read config {path}: {exc}") from exc
    if section in parser:
        return dict(parser[section])
    return dict(parser.defaults())


def front_svg(losses: np.ndarray, reference: np.ndarray) -> str:
    """A 600x600 scatter of a two-objective front with the reference point."""
    size, margin = 600, 60
    losses = np.asarray(losses, dtype=float)
    ref = np.asarray(reference, dtype=float)
    hi = np.maximum(losses.max(axis=0), ref) * 1.05
    lo = np.minimum(losses.min(axis=0), [0.0, 0.0])
    span = np.maximum(hi - lo, 1e-12)

    def to_px(point):
        x = margin + (point[0] - lo[0]) / span[0] * (size - 2 * margin)
        y = size - margin - (point[1] - lo[1]) / span[1] * (size - 2 * margin)
        return x, y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{margin}" y1="{size - margin}" x2="{size - margin}" '
        f'y2="{size - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{size - margin}" stroke="black"/>',
        f'<text x="{size // 2}" y="{size - margin // 3}" text-anchor="middle" '
        f'font-size="16">ℓ₁</text>',
        f'<text x="{margin // 3}" y="{size // 2}" text-anchor="middle" font-size="16" '
        f'transform="rotate(-90 {margin // 3} {size // 2})">ℓ₂</text>',
    ]
    rx, ry = to_px(ref)
    parts.append(
        f'<path d="M {rx - 7} {ry} H {rx + 7} M {rx} {ry - 7} V {ry + 7}" '
        f'stroke="red" stroke-width="2"/>'
    )
    for point in losses:
        x, y = to_px(point)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="steelblue"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _front_collapsed(losses: np.ndarray, reference: np.ndarray) -> bool:
    """True when a single point carries essentially all the hypervolume."""
    from .pareto import hypervolume_exact

    if reference.shape[0] > 3:
        return False
    total = hypervolume_exact(losses, reference)
    if total <= 0.0:
        return True
    best_single = max(hypervolume_exact(p[None, :], reference) for p in losses)
    return best_single >= 0.99 * total


# ---------------------------------------------------------------- voronoi


def _cmd_voronoi(args) -> int:
    config = GaConfig(
        dim=args.dim,
        num_sites=args.sites,
        num_points=args.points,
        num_generations=args.generations,
        num_species=args.species,
        seed=args.seed,
    )
    result = evolve(config)
    out_path = Path(args.out) if args.out else default_out_root() / "partition.json"
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        save_partition(out_path, result.partition, num_points_config=config.num_points)
    except OSError as exc:
        raise _IoFailure(f"cannot write {out_path}: {exc}") from exc
    _write_manifest(out_path.parent, "voronoi", asdict(config), args.seed)
    print(f"partition written to {out_path}")
    print(f"final fitness: {result.partition.fitness:.6f}")
    return EXIT_OK


# ------------------------------------------------------------------ train


def _train_config_from_args(args, parser) -> TrainConfig:
    if args.manifest:
        stored = _load_manifest(args.manifest)
        cfg = dict(stored["config"])
        eval_ref = cfg.get("eval_reference")
        cfg["eval_reference"] = tuple(eval_ref) if eval_ref is not None else None
        return TrainConfig(**cfg)

    file_values: dict = {}
    if args.config:
        file_values = _load_config_file(args.config, "train")

    def pick(flag_value, key, cast, default):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return cast(file_values[key])
        return default

    problem = pick(args.problem, "problem", str, None)
    if problem is None:
        parser.error("--problem is required (flag or config file)")
    if problem not in PROBLEM_NAMES:
        parser.error(f"unknown problem {problem!r}; valid: {', '.join(PROBLEM_NAMES)}")
    solver = pick(args.solver, "solver", str, "hvvs")
    if solver not in SOLVERS:
        parser.error(f"unknown solver {solver!r}; valid: {', '.join(SOLVERS)}")
    defaults = TrainConfig(problem=problem)
    return TrainConfig(
        problem=problem,
        solver=solver,
        rays_per_step=pick(args.rays, "rays_per_step", int, None),
        penalty_weight=pick(args.penalty, "penalty_weight", float, defaults.penalty_weight),
        learning_rate=pick(args.lr, "learning_rate", float, defaults.learning_rate),
        iterations=pick(args.iterations, "iterations", int, defaults.iterations),
        seed=args.seed,
        optimizer=pick(args.optimizer, "optimizer", str, defaults.optimizer),
        eval_rays=pick(args.eval_rays, "eval_rays", int, defaults.eval_rays),
        partition_path=pick(args.partition, "partition_path", str, None),
        literal_penalty_sign=bool(args.literal_alg2_sign),
    )


def _write_run_outputs(out_dir: Path, result: RunResult, problem_name: str) -> None:
    _write_text(out_dir / "result.json", result.to_json())
    _write_text(out_dir / "front.csv", result.front_csv())
    reference = np.asarray(result.config["eval_reference"], dtype=float)
    if result.eval_losses.shape[1] == 2:
        _write_text(out_dir / "front.svg", front_svg(result.eval_losses, reference))
    problem = get_problem(problem_name)
    net = HyperNet(
        problem.n_objectives,
        problem.dim,
        rng=np.random.default_rng(0),
        hidden=result.config["hidden_width"],
        bounds=problem.bounds,
    )
    net.set_params(result.parameters)
    save_checkpoint(out_dir / "checkpoint.npz", net, extra={"config": result.config})


def _cmd_train(args, parser) -> int:
    config = _train_config_from_args(args, parser)
    result = train(config)
    out_dir = Path(args.out) if args.out else default_out_root() / f"train-{config.problem}-{config.solver}-s{config.seed}"
    _write_run_outputs(out_dir, result, config.problem)
    _write_manifest(out_dir, "train", result.config, config.seed, args.config)
    reference = np.asarray(result.config["eval_reference"], dtype=float)
    print(f"problem {config.problem}  solver {config.solver}  seed {config.seed}")
    print(f"hypervolume: {result.hypervolume:.4f}")
    if _front_collapsed(result.eval_losses, reference):
        print("warning: front collapsed (one point carries almost all hypervolume)")
    print(f"outputs in {out_dir}")
    return EXIT_OK


# ------------------------------------------------------------------ bench


def _cmd_bench(args, parser) -> int:
    problems = args.problems.split(",") if args.problems else list(BENCH_SUITE)
    solvers = args.solvers.split(",") if args.solvers else ["hvvs"]
    for name in problems:
        if name not in PROBLEM_NAMES:
            parser.error(f"unknown problem {name!r}")
    for name in solvers:
        if name not in SOLVERS:
            parser.error(f"unknown solver {name!r}")

    out_dir = Path(args.out) if args.out else default_out_root() / "bench"
    cells: dict[tuple[str, str], list[float]] = {}
    overrides = {}
    if args.iterations is not None:
        overrides["iterations"] = args.iterations
    for problem in problems:
        for solver in solvers:
            values = []
            for seed in range(args.runs):
                config = TrainConfig(problem=problem, solver=solver, seed=seed, **overrides)
                result = train(config)
                values.append(result.hypervolume)
                cell_dir = out_dir / f"{problem}-{solver}-s{seed}"
                _write_text(cell_dir / "result.json", result.to_json())
            cells[(problem, solver)] = values

    width = max(len(p) for p in problems) + 2
    header = "problem".ljust(width) + "".join(s.rjust(18) for s in solvers)
    print(header)
    summary = {}
    floor_violated = False
    for problem in problems:
        row = problem.ljust(width)
        for solver in solvers:
            values = np.asarray(cells[(problem, solver)])
            mean, std = float(values.mean()), float(values.std())
            row += f"{mean:.3f}±{std:.3f}".rjust(18)
            summary[f"{problem}/{solver}"] = {
                "mean": mean, "std": std, "runs": values.tolist(),
            }
            if solver == "hvvs" and problem in HV_FLOORS and mean < HV_FLOORS[problem]:
                floor_violated = True
        print(row)

    _write_text(out_dir / "bench.json", json.dumps(summary, sort_keys=True, indent=2) + "\n")
    csv_lines = ["problem,solver,mean,std"] + [
        f"{p},{s},{summary[f'{p}/{s}']['mean']!r},{summary[f'{p}/{s}']['std']!r}"
        for p in problems
        for s in solvers
    ]
    _write_text(out_dir / "bench.csv", "\n".join(csv_lines) + "\n")
    _write_manifest(
        out_dir, "bench",
        {"problems": problems, "solvers": solvers, "runs": args.runs, **overrides},
        args.seed,
    )
    if floor_violated:
        print("benchmark floor violated")
        return EXIT_FLOOR
    return EXIT_OK


# ---------------------------------------------------------- benefit-graph


def _cmd_benefit_graph(args, parser) -> int:
    if args.clients < 2:
        parser.error("--clients must be at least 2")
    if not 0.0 <= args.overlap <= 1.0:
        parser.error("--overlap must be in [0, 1]")
    clients = benefit.generate_clients(
        args.clients, args.overlap, samples=args.samples, seed=args.seed
    )
    config = TrainConfig(
        problem=f"clients-{args.clients}",
        solver="ls",
        iterations=args.iterations,
        seed=args.seed,
    )
    result, problem = benefit.train_shared_hypernet(clients, config)
    net = HyperNet(
        problem.n_objectives, problem.dim,
        rng=np.random.default_rng(config.seed), hidden=config.hidden_width,
        bounds=problem.bounds,
    )
    net.set_params(result.parameters)
    candidates = benefit.default_candidate_rays(args.clients)
    graph = benefit.compute_benefit_graph(net.predict, clients, candidates)

    out_dir = Path(args.out) if args.out else default_out_root() / "benefit-graph"
    _write_text(out_dir / "graph.csv", graph.to_csv())
    payload = {
        "config": result.config,
        "overlap": args.overlap,
        "clients": args.clients,
        "graph": graph.matrix.tolist(),
        "row_argmaxes": graph.row_argmaxes().tolist(),
        "chosen_candidates": graph.chosen.tolist(),
    }
    _write_text(out_dir / "result.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
    _write_manifest(
        out_dir, "benefit-graph",
        {"clients": args.clients, "overlap": args.overlap, "samples": args.samples,
         "iterations": args.iterations},
        args.seed,
    )
    print(f"benefit graph written to {out_dir / 'graph.csv'}")
    print("row argmaxes:", " ".join(str(i) for i in graph.row_argmaxes()))
    return EXIT_OK


# ------------------------------------------------------------------- eval


def _cmd_eval(args, parser) -> int:
    try:
        net, meta = load_checkpoint(args.checkpoint)
    except OSError as exc:
        raise _IoFailure(f"cannot read checkpoint {args.checkpoint}: {exc}") from exc
    stored = meta.get("extra", {}).get("config", {})
    problem_name = stored.get("problem")
    if problem_name is None or problem_name not in PROBLEM_NAMES:
        parser.error("checkpoint does not reference a known problem")
    problem = get_problem(problem_name)
    config = TrainConfig(problem=problem_name, eval_rays=args.eval_rays)
    rays = evaluation_rays(config, problem.n_objectives)
    reference = (
        np.asarray(stored["eval_reference"], dtype=float)
        if stored.get("eval_reference")
        else config.resolved_reference(problem.n_objectives)
    )
    losses, hv = evaluate_front(
        net, problem, reference, rays, rng=np.random.default_rng(args.seed)
    )
    print(f"problem {problem_name}  rays {rays.shape[0]}")
    print(f"hypervolume: {hv:.4f}")
    if args.out:
        out_dir = Path(args.out)
        result = RunResult(
            config=stored or {"problem": problem_name},
            seed=args.seed,
            hypervolume=hv,
            eval_rays=rays,
            eval_losses=losses,
            trace=np.empty(0),
            runtime_seconds=0.0,
            parameters=net.get_params(),
        )
        _write_text(out_dir / "result.json", result.to_json())
        _write_text(out_dir / "front.csv", result.front_csv())
        _write_manifest(out_dir, "eval", {"checkpoint": args.checkpoint}, args.seed)
        print(f"outputs in {out_dir}")
    return EXIT_OK


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paretohv",
        description="Pareto front learning with hypervolume maximization and Voronoi sampling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    voronoi = sub.add_parser("voronoi", help="build a simplex partition")
    voronoi.add_argument("--dim", type=int, required=True, help="simplex dimension J")
    voronoi.add_argument("--sites", type=int, required=True, help="number of cells N")
    voronoi.add_argument("--points", type=int, default=20_000, help="Monte Carlo cloud size M")
    voronoi.add_argument("--generations", type=int, default=40)
    voronoi.add_argument("--species", type=int, default=10)
    voronoi.add_argument("--seed", type=int, default=0)
    voronoi.add_argument("--out", help="partition file path")

    train_p = sub.add_parser("train", help="train one run")
    train_p.add_argument("--problem", choices=PROBLEM_NAMES)
    train_p.add_argument("--solver", choices=SOLVERS)
    train_p.add_argument("--config", help="key=value config file, [train] section")
    train_p.add_argument("--manifest", help="re-run a stored manifest")
    train_p.add_argument("--seed", type=int, default=0)
    train_p.add_argument("--iterations", type=int)
    train_p.add_argument("--rays", type=int, help="rays per training step")
    train_p.add_argument("--penalty", type=float, help="penalty weight")
    train_p.add_argument("--lr", type=float, help="learning rate")
    train_p.add_argument("--optimizer", choices=("adam", "sgd"))
    train_p.add_argument("--eval-rays", type=int, dest="eval_rays")
    train_p.add_argument("--partition", help="partition file for ray sampling")
    train_p.add_argument("--literal-alg2-sign", action="store_true",
                         help="flip the penalty sign to the literal update rule")
    train_p.add_argument("--out", help="output directory")

    bench = sub.add_parser("bench", help="benchmark table over problems and seeds")
    bench.add_argument("--suite", choices=("toy",), default="toy")
    bench.add_argument("--runs", type=int, default=5)
    bench.add_argument("--problems", help="comma-separated subset")
    bench.add_argument("--solvers", help="comma-separated solvers (default hvvs)")
    bench.add_argument("--iterations", type=int, help="override per-run iterations")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", help="output directory")

    graph = sub.add_parser("benefit-graph", help="synthetic-client benefit graph")
    graph.add_argument("--clients", type=int, required=True)
    graph.add_argument("--overlap", type=float, required=True)
    graph.add_argument("--samples", type=int, default=64)
    graph.add_argument("--iterations", type=int, default=1500)
    graph.add_argument("--seed", type=int, default=0)
    graph.add_argument("--out", help="output directory")

    eval_p = sub.add_parser("eval", help="re-evaluate a checkpoint")
    eval_p.add_argument("--checkpoint", required=True)
    eval_p.add_argument("--eval-rays", type=int, dest="eval_rays", default=25)
    eval_p.add_argument("--seed", type=int, default=0)
    eval_p.add_argument("--out", help="output directory")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "voronoi":
            return _cmd_voronoi(args)
        if args.command == "train":
            return _cmd_train(args, parser)
        if args.command == "bench":
            return _cmd_bench(args, parser)
        if args.command == "benefit-graph":
            return _cmd_benefit_graph(args, parser)
        if args.command == "eval":
            return _cmd_eval(args, parser)
    except _IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
