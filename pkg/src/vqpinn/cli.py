"""Experiment runner: one command trains a problem and writes artifacts.

``solve --problem <name> --strategy <coll|coll_join|weak|both|all> --seed <n>
--epochs <n> --out <dir> [--config file] [--set key=value ...]``

Configuration is plain ``key=value`` text.  Precedence: per-problem
defaults, then the ``--config`` file, then dedicated flags, then ``--set``
pairs.  The fully resolved configuration is echoed to ``config.snapshot``
in the output directory; feeding that file back through ``--config``
reproduces the run byte for byte.  Outputs: ``history.csv`` (one row per
epoch, one column group per strategy), ``solution.csv`` (training grid,
truth, per-strategy model values), and ``figures/*.svg``.  Exit codes:
0 success, 1 training aborted, 2 bad usage or configuration,
3 filesystem failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from .decomposition import build, piecewise_eval
from .errors import ConfigurationError, TrainingAborted
from .figures import error_heatmap_svg, solution_overlay_svg, training_curves_svg
from .losses import LossWeights, parse_strategy
from .problems import PROBLEM_NAMES, get_problem, mesh_points
from .qnn import compile_layout
from .training import TrainerConfig, TrainRecord, train

__all__ = ["RunArtifacts", "main", "parse_config", "render_figures", "run",
           "snapshot_text"]

STRATEGY_ORDER = ("coll", "coll_join", "weak", "both")


# ---------------------------------------------------------------------------
# config schema
# ---------------------------------------------------------------------------

def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(part) for part in text.split(","))


def _parse_ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(part) for part in text.split(","))


def _fmt_float(value) -> str:
    return "%.17g" % value


_STR = (str, str)
_INT = (int, str)
_FLOAT = (float, _fmt_float)
_BOOL = (_parse_bool, lambda v: "true" if v else "false")
_FLOATS = (_parse_floats, lambda v: ",".join(_fmt_float(x) for x in v))
_INTS = (_parse_ints, lambda v: ",".join(str(x) for x in v))

_COMMON_SCHEMA = {
    "problem": _STR,
    "strategy": _STR,
    "seed": _INT,
    "epochs": _INT,
    "learning_rate": _FLOAT,
    "alpha": _FLOAT,
    "beta": _FLOAT,
    "gamma_res": _FLOAT,
    "gamma_wf": _FLOAT,
    "gamma_sbc": _FLOAT,
    "weak_include_ibv": _BOOL,
    "num_qubits": _INT,
    "depth": _INT,
    "rescale": _FLOAT,
    "out": _STR,
}

_GRID_1D = {"splits": _FLOATS, "points_per_subdomain": _INT}
_GRID_2D = {"axis_points": _INTS, "splits_x": _FLOATS, "splits_y": _FLOATS,
            "inner_depth": _INT}

_PROBLEM_SCHEMA = {
    "damped_oscillator": {**_GRID_1D, "kappa": _FLOAT, "lam": _FLOAT},
    "burgers": {**_GRID_1D, "nu": _FLOAT, "slope": _FLOAT, "offset": _FLOAT,
                "substitute_boundary_values": _BOOL},
    "linear2d": dict(_GRID_2D),
    "laplace": {**_GRID_2D, "family_size": _INT},
}


def schema_for(problem_name: str) -> dict:
    return {**_COMMON_SCHEMA, **_PROBLEM_SCHEMA[problem_name]}


def _defaults_for(problem_name: str) -> dict:
    problem = get_problem(problem_name)
    config = {
        "problem": problem_name,
        "strategy": "all",
        "seed": 0,
        "epochs": problem.default_epochs,
        "learning_rate": 0.2,
        **problem.default_weights,
        "weak_include_ibv": True,
        "num_qubits": problem.num_qubits,
        "depth": problem.depth,
        "rescale": problem.rescale,
        "out": os.path.join("runs", problem_name),
    }
    if problem.input_dim == 1:
        config["splits"] = tuple(problem.default_splits[0])
        config["points_per_subdomain"] = problem.points_per_subdomain
        if problem_name == "damped_oscillator":
            config["kappa"] = problem.kappa
            config["lam"] = problem.lam
        else:
            config["nu"] = problem.nu
            config["slope"] = problem.slope
            config["offset"] = problem.offset
            config["substitute_boundary_values"] = problem.substitute_boundary_values
    else:
        config["inner_depth"] = problem.inner_depth
        config["axis_points"] = tuple(problem.axis_points)
        config["splits_x"] = tuple(problem.default_splits[0])
        config["splits_y"] = tuple(problem.default_splits[1])
        if problem_name == "laplace":
            config["family_size"] = problem.family_size
    return config


def _read_config_file(path: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected key=value, got {line!r}"
                )
            key, _, value = line.partition("=")
            pairs[key.strip()] = value.strip()
    return pairs


def _split_set_pair(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigurationError(f"--set expects key=value, got {item!r}")
    key, _, value = item.partition("=")
    return key.strip(), value.strip()


def parse_config(file_pairs: dict[str, str], flag_pairs: dict[str, str],
                 set_pairs: dict[str, str]) -> dict:
    """Resolve defaults < config file < flags < --set into a typed config."""
    problem_name = None
    for source in (set_pairs, flag_pairs, file_pairs):
        if "problem" in source:
            problem_name = source["problem"]
            break
    if problem_name is None:
        raise ConfigurationError("problem is required (use --problem)")
    if problem_name not in PROBLEM_NAMES:
        options = ", ".join(PROBLEM_NAMES)
        raise ConfigurationError(
            f"unknown problem {problem_name!r}; choose one of {options}"
        )
    schema = schema_for(problem_name)
    config = _defaults_for(problem_name)
    for source in (file_pairs, flag_pairs, set_pairs):
        for key, text in source.items():
            if key not in schema:
                raise ConfigurationError(
                    f"unknown key {key!r} for problem {problem_name}"
                )
            parse = schema[key][0]
            try:
                config[key] = parse(text)
            except ValueError as exc:
                raise ConfigurationError(f"bad value for {key}: {exc}") from exc
    if config["strategy"] != "all":
        parse_strategy(config["strategy"])
    if config["epochs"] < 1:
        raise ConfigurationError(f"epochs must be >= 1, got {config['epochs']}")
    return config


def snapshot_text(config: dict) -> str:
    schema = schema_for(config["problem"])
    lines = [f"{key}={schema[key][1](config[key])}" for key in sorted(config)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

@dataclass
class RunArtifacts:
    """Everything a finished run writes, kept in memory for rendering."""

    config: dict
    input_dim: int
    histories: dict[str, list[TrainRecord]]
    points: np.ndarray
    truth: np.ndarray
    solutions: dict[str, np.ndarray]
    mesh_axes: tuple[np.ndarray, np.ndarray] | None
    mesh_truth: np.ndarray | None
    mesh_solutions: dict[str, np.ndarray]


def _instantiate(config: dict):
    name = config["problem"]
    kwargs = {"num_qubits": config["num_qubits"], "depth": config["depth"],
              "rescale": config["rescale"]}
    if name == "damped_oscillator":
        kwargs.update(kappa=config["kappa"], lam=config["lam"])
    elif name == "burgers":
        kwargs.update(nu=config["nu"], slope=config["slope"],
                      offset=config["offset"],
                      substitute_boundary_values=config["substitute_boundary_values"])
    else:
        kwargs.update(inner_depth=config["inner_depth"])
    problem = get_problem(name, **kwargs)
    if problem.input_dim == 1:
        decomposition = build(problem, splits=config["splits"],
                              points_per_subdomain=config["points_per_subdomain"])
    else:
        problem.axis_points = tuple(config["axis_points"])
        if name == "laplace":
            problem.family_size = config["family_size"]
        decomposition = build(problem,
                              splits=(config["splits_x"], config["splits_y"]))
    return problem, decomposition


def _strategies(config: dict) -> tuple[str, ...]:
    if config["strategy"] == "all":
        return STRATEGY_ORDER
    return (config["strategy"],)


def run(config: dict, quiet: bool = False) -> RunArtifacts:
    """Train every requested strategy, write all artifacts, print a summary."""
    problem, decomposition = _instantiate(config)
    compiled = compile_layout(problem.layout())
    trainer = TrainerConfig(
        epochs=config["epochs"],
        learning_rate=config["learning_rate"],
        seed=config["seed"],
        weights=LossWeights(alpha=config["alpha"], beta=config["beta"],
                            gamma_res=config["gamma_res"],
                            gamma_wf=config["gamma_wf"],
                            gamma_sbc=config["gamma_sbc"]),
        weak_include_ibv=config["weak_include_ibv"],
    )
    points = decomposition.all_points()
    truth = problem.solution(points)
    mesh_axes = None
    mesh_truth = None
    if problem.input_dim == 2:
        mesh_axes = problem.default_axis_grids()
        mesh = mesh_points(*mesh_axes)
        mesh_truth = problem.solution(mesh).reshape(
            mesh_axes[0].size, mesh_axes[1].size)

    histories: dict[str, list[TrainRecord]] = {}
    solutions: dict[str, np.ndarray] = {}
    mesh_solutions: dict[str, np.ndarray] = {}
    for name in _strategies(config):
        result = train(problem, parse_strategy(name), trainer,
                       decomposition, compiled)
        histories[name] = result.history
        solutions[name] = piecewise_eval(result.pm, points)
        if problem.input_dim == 2:
            mesh = mesh_points(*mesh_axes)
            mesh_solutions[name] = piecewise_eval(result.pm, mesh).reshape(
                mesh_axes[0].size, mesh_axes[1].size)
        if not quiet:
            last = result.history[-1]
            print(f"{name}: total={last.breakdown.total:.6e} "
                  f"metric={last.metric:.6e}")

    artifacts = RunArtifacts(
        config=config, input_dim=problem.input_dim, histories=histories,
        points=points, truth=truth, solutions=solutions,
        mesh_axes=mesh_axes, mesh_truth=mesh_truth,
        mesh_solutions=mesh_solutions,
    )
    write_artifacts(artifacts)
    return artifacts


# ---------------------------------------------------------------------------
# artifact files
# ---------------------------------------------------------------------------

def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def history_csv(artifacts: RunArtifacts) -> str:
    names = list(artifacts.histories)
    header = ["epoch"]
    for name in names:
        header += [f"{name}_{part}" for part in
                   ("de", "ibv", "sbc", "wf", "total", "metric")]
    rows = [",".join(header)]
    epochs = len(next(iter(artifacts.histories.values())))
    for e in range(epochs):
        cells = [str(e)]
        for name in names:
            record = artifacts.histories[name][e]
            b = record.breakdown
            cells += [_fmt_float(v) for v in
                      (b.l_de, b.l_ibv, b.l_sbc, b.l_wf, b.total, record.metric)]
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def solution_csv(artifacts: RunArtifacts) -> str:
    names = list(artifacts.solutions)
    coords = ["x"] if artifacts.input_dim == 1 else ["x", "y"]
    rows = [",".join(coords + ["truth"] + names)]
    for i in range(artifacts.points.shape[0]):
        cells = [_fmt_float(c) for c in artifacts.points[i]]
        cells.append(_fmt_float(artifacts.truth[i]))
        cells += [_fmt_float(artifacts.solutions[name][i]) for name in names]
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def render_figures(artifacts: RunArtifacts) -> dict[str, str]:
    figures = {"training_curves.svg": training_curves_svg(artifacts.histories)}
    if artifacts.input_dim == 1:
        figures["solution.svg"] = solution_overlay_svg(
            artifacts.points[:, 0], artifacts.truth, artifacts.solutions)
    else:
        errors = {name: np.abs(mesh - artifacts.mesh_truth)
                  for name, mesh in artifacts.mesh_solutions.items()}
        figures["solution.svg"] = error_heatmap_svg(artifacts.mesh_truth, errors)
    return figures


def write_artifacts(artifacts: RunArtifacts) -> None:
    out = artifacts.config["out"]
    figures_dir = os.path.join(out, "figures")
    os.makedirs(figures_dir, exist_ok=True)
    _write_atomic(os.path.join(out, "config.snapshot"),
                  snapshot_text(artifacts.config))
    _write_atomic(os.path.join(out, "history.csv"), history_csv(artifacts))
    _write_atomic(os.path.join(out, "solution.csv"), solution_csv(artifacts))
    for filename, text in render_figures(artifacts).items():
        _write_atomic(os.path.join(figures_dir, filename), text)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solve",
        description="Train quantum-circuit trial functions on a benchmark "
                    "differential equation and write CSV/SVG artifacts.",
    )
    parser.add_argument("--problem", help="one of: " + ", ".join(PROBLEM_NAMES))
    parser.add_argument("--strategy",
                        help="coll, coll_join, weak, both, or all")
    parser.add_argument("--seed", help="random seed for parameter init")
    parser.add_argument("--epochs", help="optimizer steps per strategy")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        file_pairs = _read_config_file(args.config) if args.config else {}
        flag_pairs = {key: value for key, value in (
            ("problem", args.problem), ("strategy", args.strategy),
            ("seed", args.seed), ("epochs", args.epochs), ("out", args.out),
        ) if value is not None}
        set_pairs = dict(_split_set_pair(item) for item in args.set)
        config = parse_config(file_pairs, flag_pairs, set_pairs)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        run(config)
    except TrainingAborted as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return 1
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"filesystem error: {exc}", file=sys.stderr)
        return 3
    return 0
