"""Batch testing of a trained model: cost distributions per workforce size."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .assignment import DEFAULT_GAMMA, Schedule, build_schedule
from .fuzzy import FisPair
from .ga import deltas, rms
from .scenario import Scenario
from .scenario_io import ModelFile, generate_scenario, save_schedule


def schedule_cost(schedule: Schedule, scenario: Scenario) -> float:
    d1, d2, d3 = deltas(schedule, scenario)
    return rms(d1) + rms(d2) + rms(d3)


@dataclass
class CostDistribution:
    worker_count: int
    costs: np.ndarray
    understaffed: np.ndarray  # bool per scenario
    limit_violations: np.ndarray  # workers over their weekly limit, per scenario

    @property
    def n(self) -> int:
        return len(self.costs)

    def _q(self, q):
        # "lower" keeps every summary value equal to some schedule's cost
        return float(np.quantile(self.costs, q, method="lower"))

    @property
    def min(self) -> float:
        return float(self.costs.min())

    @property
    def q1(self) -> float:
        return self._q(0.25)

    @property
    def median(self) -> float:
        return self._q(0.5)

    @property
    def q3(self) -> float:
        return self._q(0.75)

    @property
    def max(self) -> float:
        return float(self.costs.max())

    @property
    def variance(self) -> float:
        return float(np.var(self.costs))

    @property
    def median_index(self) -> int:
        order = np.argsort(self.costs, kind="stable")
        return int(order[(self.n - 1) // 2])

    def summary(self) -> dict:
        return {
            "workers": self.worker_count,
            "scenarios": self.n,
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
            "variance": self.variance,
            "understaffed_scenarios": int(self.understaffed.sum()),
            "limit_violations": int(self.limit_violations.sum()),
        }

    def to_dict(self) -> dict:
        return {
            **self.summary(),
            "costs": [float(c) for c in self.costs],
            "understaffed": [bool(u) for u in self.understaffed],
            "limit_violations_per_scenario": [int(v) for v in self.limit_violations],
        }


@dataclass
class BatchResult:
    distribution: CostDistribution
    median_scenario: Scenario
    median_schedule: Schedule


def _fis_pair(model) -> tuple[FisPair, float | None]:
    if isinstance(model, ModelFile):
        return model.fis_pair, model.gamma
    return model, None


def run_batch(model, pool: np.ndarray, worker_count: int, batch_size: int, seed: int = 0,
              gamma: float | None = None, hard_limit: bool = False) -> BatchResult:
    """Schedule ``batch_size`` random scenarios drawn from ``pool`` and collect costs.

    Scenario ``i`` uses seed ``[seed, i]`` regardless of ``worker_count``, so
    repeated sizes with one seed give identical batches.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    pair, model_gamma = _fis_pair(model)
    gamma = gamma if gamma is not None else (model_gamma or DEFAULT_GAMMA)
    costs, under, over, kept = [], [], [], []
    for i in range(batch_size):
        scenario = generate_scenario(pool, worker_count, np.random.default_rng([seed, i, 0]))
        schedule = build_schedule(scenario, pair, gamma, np.random.default_rng([seed, i, 1]),
                                  hard_limit)
        costs.append(schedule_cost(schedule, scenario))
        under.append(scenario.understaffed)
        over.append(int((schedule.weekly_hours > scenario.column("weekly_limit")).sum()))
        kept.append((scenario, schedule))
    dist = CostDistribution(worker_count, np.array(costs), np.array(under), np.array(over))
    scenario, schedule = kept[dist.median_index]
    return BatchResult(dist, scenario, schedule)


@dataclass
class StaffingComparison:
    batches: dict[int, BatchResult]
    comparisons: list[dict] = field(default_factory=list)

    def boxplot_rows(self) -> list[dict]:
        keys = ("workers", "scenarios", "min", "q1", "median", "q3", "max", "variance")
        out = []
        for b in self.batches.values():
            s = b.distribution.summary()
            out.append({k: s[k] for k in keys})
        return out

    def to_dict(self) -> dict:
        return {
            "distributions": [b.distribution.to_dict() for b in self.batches.values()],
            "comparisons": self.comparisons,
        }


def compare_staffing(model, pool, counts: Sequence[int], batch_size: int, seed: int = 0,
                     gamma: float | None = None) -> StaffingComparison:
    if not counts:
        raise ValueError("need at least one workforce size")
    batches = {}
    for c in counts:
        if c not in batches:
            batches[c] = run_batch(model, pool, c, batch_size, seed, gamma)
    comparisons = []
    for a, b in itertools.combinations(batches, 2):
        da, db = batches[a].distribution, batches[b].distribution
        comparisons.append({
            "a": a,
            "b": b,
            "median_a": da.median,
            "median_b": db.median,
            "median_a_lower": da.median < db.median,
            "variance_a": da.variance,
            "variance_b": db.variance,
            "variance_a_lower": da.variance < db.variance,
        })
    return StaffingComparison(batches, comparisons)


def write_comparison(report: StaffingComparison, out_dir, config: dict | None = None) -> None:
    """distribution.json + boxplot.csv at the top, median_schedule.csv per size."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = report.to_dict()
    if config is not None:
        data["config"] = config
    (out / "distribution.json").write_text(json.dumps(data, indent=2) + "\n")
    rows = report.boxplot_rows()
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    (out / "boxplot.csv").write_text(buf.getvalue())
    for count, batch in report.batches.items():
        sub = out / f"workers_{count}"
        sub.mkdir(exist_ok=True)
        save_schedule(batch.median_schedule, batch.median_scenario, sub / "median_schedule.csv")
