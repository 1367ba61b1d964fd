"""Command line: generate data, train, schedule, evaluate.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.
The default seed can be set with the FUZZYSCHED_SEED environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .assignment import build_schedule
from .evaluation import compare_staffing, write_comparison
from .ga import GaConfig, decode, evolve
from .scenario_io import (
    DEFAULT_DENSITY,
    FormatError,
    ModelFile,
    generate_pool,
    generate_scenario,
    load_availability,
    load_model,
    load_scenario,
    save_assignment,
    save_availability,
    save_model,
    save_scenario,
    save_schedule,
)

log = logging.getLogger("fuzzysched")

SEED_ENV = "FUZZYSCHED_SEED"
CONFIG_ALIASES = {
    "pop": "population_size",
    "gens": "max_generations",
    "stall": "stall_generations",
    "elite": "elite_count",
    "xover": "crossover_fraction",
    "n": "n_scenarios",
    "jobs": "n_jobs",
}


class CliError(Exception):
    """Runtime failure reported with exit code 1."""


def _default_seed() -> int:
    value = os.environ.get(SEED_ENV)
    return int(value) if value else 0


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _write_json(data, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def _load_pool(path) -> tuple[list[str], np.ndarray]:
    return load_availability(path)


def _pool_ids(n: int) -> list[str]:
    return [f"W{i + 1:03d}" for i in range(n)]


# --- generate --------------------------------------------------------------


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.pool:
        ids, pool = _load_pool(args.pool)
    else:
        pool = generate_pool(args.pool_size, tuple(args.density), np.random.default_rng([args.seed, 1]))
        ids = _pool_ids(len(pool))
        save_availability(pool, ids, out / "pool.csv")
    if args.workers > len(pool):
        raise CliError(f"--workers {args.workers} exceeds the pool size {len(pool)}")
    for i in range(args.count):
        sc = generate_scenario(pool, args.workers, np.random.default_rng([args.seed, 2, i]),
                               pool_ids=ids)
        save_scenario(sc, out / f"scenario_{i:03d}.json")
    _write_json({"command": "generate", **_resolved(args)}, out / "run_config.json")
    log.info("wrote %d scenarios to %s", args.count, out)
    return 0


# --- train -----------------------------------------------------------------


def parse_config_overrides(text: str) -> dict:
    """``key=value`` pairs separated by commas, or a path to a JSON file."""
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise CliError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}: invalid JSON ({exc})") from None
        if isinstance(data, dict) and "ga" in data:
            data = data["ga"]
        elif isinstance(data, dict) and "training" in data:
            # a model.json: reuse its training configuration
            data = data["training"].get("config", {})
        if not isinstance(data, dict):
            raise CliError(f"{path}: config must be a JSON object")
        return {CONFIG_ALIASES.get(k, k): v for k, v in data.items()}
    out = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise ValueError(f"bad config item {item!r}, expected key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        key = CONFIG_ALIASES.get(key, key)
        field_type = GaConfig.__dataclass_fields__.get(key)
        if field_type is None:
            raise ValueError(f"unknown config key {key!r}")
        default = getattr(GaConfig(), key)
        if isinstance(default, bool):
            out[key] = value.lower() in ("1", "true", "yes")
        else:
            out[key] = type(default)(value)
    return out


def _scenario_paths(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("scenario_*.json")) or sorted(p.glob("*.json")))
        elif p.exists():
            out.append(p)
        else:
            raise CliError(f"scenario path not found: {p}")
    if not out:
        raise CliError("no scenario files found")
    return out


def _history_csv(history) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["generation", "best", "mean"])
    for h in history:
        w.writerow([h.generation, repr(h.best), repr(h.mean)])
    return buf.getvalue()


def cmd_train(args) -> int:
    overrides = parse_config_overrides(args.config) if args.config else {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    elif "seed" not in overrides:
        overrides["seed"] = _default_seed()
    if args.gamma is not None:
        overrides["gamma"] = args.gamma
    if args.jobs is not None:
        overrides["n_jobs"] = args.jobs
    config = GaConfig.from_dict(overrides).validate()

    paths = _scenario_paths(args.scenarios)[: config.n_scenarios]
    scenarios = [load_scenario(p) for p in paths]
    if len(scenarios) < config.n_scenarios:
        log.warning("only %d scenarios available (n=%d requested)", len(scenarios), config.n_scenarios)
    result = evolve(config, scenarios)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    training = {
        "config": config.to_dict(),
        "seed": config.seed,
        "scenarios": [str(p) for p in paths],
        "final_fitness": result.best_fitness,
        "stopped_by": result.stopped_by,
        "chromosome": list(result.best.rule_genes) + list(result.best.mf_genes),
        "history": [[h.generation, h.best, h.mean] for h in result.history],
    }
    model = ModelFile(decode(result.best), config.gamma, training,
                      {"created": datetime.now(timezone.utc).isoformat(), "version": __version__})
    save_model(model, out / "model.json")
    (out / "history.csv").write_text(_history_csv(result.history))
    _write_json({"command": "train", **_resolved(args), "ga": config.to_dict()}, out / "config.json")
    print(f"best fitness {result.best_fitness:.4f} after {len(result.history)} generations "
          f"({result.stopped_by})", file=sys.stderr)
    return 0


# --- schedule --------------------------------------------------------------


def cmd_schedule(args) -> int:
    model = load_model(args.model)
    scenario = load_scenario(args.scenario)
    gamma = args.gamma if args.gamma is not None else model.gamma
    seed = args.seed if args.seed is not None else _default_seed()
    schedule = build_schedule(scenario, model.fis_pair, gamma, np.random.default_rng(seed),
                              args.hard_limit)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_schedule(schedule, scenario, out)
    save_assignment(schedule, scenario, out.with_name(f"{out.stem}_slots.csv"))
    _write_json({"command": "schedule", **_resolved(args), "gamma": gamma, "seed": seed},
                out.with_name(f"{out.stem}_config.json"))
    for s in schedule.shortfalls:
        print(f"shortfall: slot {s.slot} has {s.available} available, {s.missing} short",
              file=sys.stderr)
    over = schedule.weekly_hours - scenario.column("weekly_limit")
    for i in np.flatnonzero(over > 0):
        print(f"weekly limit exceeded: {scenario.workers[i].id} by {over[i]} h", file=sys.stderr)
    print(f"{len(schedule.shortfalls)} shortfall slots, {int((over > 0).sum())} limit violations",
          file=sys.stderr)
    return 0


# --- evaluate --------------------------------------------------------------


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    seed = args.seed if args.seed is not None else _default_seed()
    if args.pool:
        _, pool = _load_pool(args.pool)
    else:
        pool = generate_pool(args.pool_size, DEFAULT_DENSITY, np.random.default_rng([seed, 3]))
    counts = args.workers or [20, 16]
    for c in counts:
        if c > len(pool):
            raise CliError(f"--workers {c} exceeds the pool size {len(pool)}")
    report = compare_staffing(model, pool, counts, args.batch, seed, args.gamma)
    write_comparison(report, args.out, {"command": "evaluate", **_resolved(args), "seed": seed})
    for row in report.boxplot_rows():
        print("workers={workers} median={median:.4f} variance={variance:.4f}".format(**row),
              file=sys.stderr)
    return 0


# --- wiring ----------------------------------------------------------------


def _resolved(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzysched", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample training/test scenarios")
    g.add_argument("--pool-size", type=_positive_int, default=40)
    g.add_argument("--pool", help="availability CSV to sample from instead of a synthetic pool")
    g.add_argument("--density", type=float, nargs=2, default=list(DEFAULT_DENSITY),
                   metavar=("LO", "HI"))
    g.add_argument("--workers", type=_positive_int, default=20)
    g.add_argument("--count", type=_positive_int, default=30)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="learn rule tables and output MFs")
    t.add_argument("--scenarios", nargs="+", required=True, help="scenario files or directories")
    t.add_argument("--config", help="JSON file or key=value list, e.g. pop=50,gens=20,n=5")
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--gamma", type=float, default=None)
    t.add_argument("--jobs", type=_positive_int, default=None)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("schedule", help="build one weekly schedule")
    s.add_argument("--model", required=True)
    s.add_argument("--scenario", required=True)
    s.add_argument("--gamma", type=float, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--hard-limit", action="store_true", help="never assign past the weekly limit")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_schedule)

    e = sub.add_parser("evaluate", help="cost distributions per workforce size")
    e.add_argument("--model", required=True)
    e.add_argument("--pool", help="availability CSV of test workers")
    e.add_argument("--pool-size", type=_positive_int, default=30)
    e.add_argument("--workers", type=_positive_int, action="append")
    e.add_argument("--batch", type=_positive_int, default=200)
    e.add_argument("--gamma", type=float, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and args.command == "generate":
        args.seed = _default_seed()
    if args.command == "generate":
        lo, hi = args.density
        if not 0 <= lo <= hi <= 1:
            parser.error("--density needs 0 <= LO <= HI <= 1")
    if getattr(args, "gamma", None) is not None and args.gamma < 1:
        parser.error("--gamma must be >= 1")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CliError, FormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
