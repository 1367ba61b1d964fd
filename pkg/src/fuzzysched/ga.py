"""Genetic learning of the rule tables and the shared output MFs.

A chromosome holds 34 genes: 16 FIS1 consequents, 9 FIS2 consequents (both
row-major, values 1..5) and 9 output-MF parameters. The MF genes are four
peaks (Low .. Very High; Very Low is pinned at 0) followed by five
half-widths (Very Low .. Very High).
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .assignment import DEFAULT_GAMMA, Schedule, build_schedule
from .fuzzy import N_OUTPUT_MFS, FisPair, OutputPartition, TriangularMf, make_fis_pair
from .scenario import Scenario

log = logging.getLogger(__name__)

FIS1_RULES = 16
FIS2_RULES = 9
N_RULE_GENES = FIS1_RULES + FIS2_RULES
N_MF_GENES = 9
CHROMOSOME_LENGTH = N_RULE_GENES + N_MF_GENES
MIN_HALF_WIDTH = 0.02
MAX_HALF_WIDTH = 0.5

if CHROMOSOME_LENGTH != 34 or N_MF_GENES != 2 * N_OUTPUT_MFS - 1:
    raise ImportError("chromosome layout is inconsistent")


@dataclass(frozen=True)
class Chromosome:
    rule_genes: tuple[int, ...]
    mf_genes: tuple[float, ...]

    def __post_init__(self):
        if len(self.rule_genes) != N_RULE_GENES or len(self.mf_genes) != N_MF_GENES:
            raise ValueError(
                f"chromosome needs {N_RULE_GENES}+{N_MF_GENES} genes, "
                f"got {len(self.rule_genes)}+{len(self.mf_genes)}"
            )
        object.__setattr__(self, "rule_genes", tuple(int(g) for g in self.rule_genes))
        object.__setattr__(self, "mf_genes", tuple(float(g) for g in self.mf_genes))
        if any(not 1 <= g <= N_OUTPUT_MFS for g in self.rule_genes):
            raise ValueError("rule genes must lie in 1..5")
        if not all(np.isfinite(self.mf_genes)):
            raise ValueError("mf genes must be finite")

    def __len__(self):
        return CHROMOSOME_LENGTH

    def to_array(self) -> np.ndarray:
        return np.concatenate([np.array(self.rule_genes, float), np.array(self.mf_genes)])

    @classmethod
    def from_array(cls, genes) -> "Chromosome":
        genes = repair(np.asarray(genes, dtype=float))
        return cls(tuple(genes[:N_RULE_GENES].astype(int)), tuple(genes[N_RULE_GENES:]))


def repair(genes: np.ndarray) -> np.ndarray:
    """Round/clip rule genes and clip MF genes into their valid ranges."""
    g = np.array(genes, dtype=float)
    g[..., :N_RULE_GENES] = np.clip(np.rint(g[..., :N_RULE_GENES]), 1, N_OUTPUT_MFS)
    g[..., N_RULE_GENES:N_RULE_GENES + 4] = np.clip(g[..., N_RULE_GENES:N_RULE_GENES + 4], 0, 1)
    g[..., N_RULE_GENES + 4:] = np.clip(g[..., N_RULE_GENES + 4:], MIN_HALF_WIDTH, MAX_HALF_WIDTH)
    return g


def output_partition(mf_genes) -> OutputPartition:
    genes = repair(np.concatenate([np.ones(N_RULE_GENES), np.asarray(mf_genes, float)]))
    genes = genes[N_RULE_GENES:]
    peaks = np.sort(np.concatenate([[0.0], genes[:4]]))
    widths = genes[4:]
    mfs = tuple(
        TriangularMf(float(max(0.0, p - w)), float(p), float(min(1.0, p + w)))
        for p, w in zip(peaks, widths)
    )
    return OutputPartition(mfs)


def decode(c: Chromosome) -> FisPair:
    rules = c.rule_genes
    fis1 = [rules[r * 4:(r + 1) * 4] for r in range(4)]
    fis2 = [rules[FIS1_RULES + r * 3:FIS1_RULES + (r + 1) * 3] for r in range(3)]
    return make_fis_pair(fis1, fis2, output_partition(c.mf_genes))


def encode(fis_pair: FisPair) -> Chromosome:
    """Inverse of :func:`decode` for pairs whose MFs follow the gene layout."""
    rules = list(fis_pair.fis1.rules.as_array().ravel()) + list(fis_pair.fis2.rules.as_array().ravel())
    mfs = fis_pair.output.mfs
    peaks = [mf.peak for mf in mfs[1:]]
    widths = [_half_width(mf) for mf in mfs]
    return Chromosome(tuple(rules), tuple(peaks + widths))


def _half_width(mf) -> float:
    # subtraction can land one ulp off; prefer a width that rebuilds both corners exactly
    guesses = [mf.peak - mf.left, mf.right - mf.peak]
    guesses += [float(np.nextafter(g, d)) for g in guesses for d in (0.0, 1.0)]
    for w in guesses:
        if max(0.0, mf.peak - w) == mf.left and min(1.0, mf.peak + w) == mf.right:
            return w
    return max(guesses[:2])


def random_chromosome(rng: np.random.Generator) -> Chromosome:
    rules = rng.integers(1, N_OUTPUT_MFS + 1, size=N_RULE_GENES)
    peaks = rng.uniform(0.0, 1.0, size=4)
    widths = rng.uniform(MIN_HALF_WIDTH, MAX_HALF_WIDTH, size=N_OUTPUT_MFS)
    return Chromosome(tuple(rules), tuple(np.concatenate([peaks, widths])))


# --- fitness ---------------------------------------------------------------


def deltas(schedule: Schedule, scenario: Scenario):
    """Per worker-day shift error, per-worker weekly error and weekly-limit excess."""
    daily = schedule.daily_hours
    weekly = schedule.weekly_hours
    shift = scenario.column("preferred_shift_length")
    d1 = (daily - shift[:, None])[daily > 0]
    d2 = weekly - scenario.column("preferred_weekly_hours")
    d3 = np.maximum(0, weekly - scenario.column("weekly_limit"))
    return d1.astype(float), d2.astype(float), d3.astype(float)


def rms(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(v * v)))


@dataclass
class FitnessReport:
    delta1: list[np.ndarray]
    delta2: list[np.ndarray]
    delta3: list[np.ndarray]

    @property
    def rms_values(self) -> np.ndarray:
        """(n_scenarios, 3) RMS of each delta list."""
        return np.array(
            [[rms(a), rms(b), rms(c)] for a, b, c in zip(self.delta1, self.delta2, self.delta3)]
        ).reshape(-1, 3)

    @property
    def costs(self) -> np.ndarray:
        return self.rms_values.sum(axis=1)

    @property
    def cost(self) -> float:
        return float(self.costs.mean())


def schedule_rng(seed: int, scenario_index: int) -> np.random.Generator:
    # same stream for every chromosome: fitness depends only on (chromosome, scenarios, seed)
    return np.random.default_rng([seed, scenario_index])


def fitness_report(c, scenarios: Sequence[Scenario], gamma=DEFAULT_GAMMA, seed=0,
                   hard_limit=False) -> FitnessReport:
    if not scenarios:
        raise ValueError("need at least one scenario")
    pair = c if isinstance(c, FisPair) else decode(c)
    report = FitnessReport([], [], [])
    for i, sc in enumerate(scenarios):
        sched = build_schedule(sc, pair, gamma, schedule_rng(seed, i), hard_limit)
        d1, d2, d3 = deltas(sched, sc)
        report.delta1.append(d1)
        report.delta2.append(d2)
        report.delta3.append(d3)
    return report


def fitness(c, scenarios: Sequence[Scenario], gamma=DEFAULT_GAMMA, seed=0,
            hard_limit=False) -> float:
    """Mean over scenarios of RMS(shift error) + RMS(weekly error) + RMS(limit excess)."""
    return fitness_report(c, scenarios, gamma, seed, hard_limit).cost


# --- evolution -------------------------------------------------------------


@dataclass
class GaConfig:
    population_size: int = 200
    max_generations: int = 50
    stall_generations: int = 10
    elite_count: int = 10
    crossover_fraction: float = 0.8
    n_scenarios: int = 30
    rule_mutation_rate: float = 0.1
    mf_mutation_sigma: float = 0.1
    gamma: float = DEFAULT_GAMMA
    hard_limit: bool = False
    seed: int = 0
    n_jobs: int = 1

    def validate(self) -> "GaConfig":
        problems = []
        if self.population_size < 2:
            problems.append("population_size must be >= 2")
        if not 0 <= self.elite_count < self.population_size:
            problems.append("elite_count must satisfy 0 <= elite_count < population_size")
        if not 0.0 <= self.crossover_fraction <= 1.0:
            problems.append("crossover_fraction must lie in [0, 1]")
        if self.max_generations < 1:
            problems.append("max_generations must be >= 1")
        if self.stall_generations < 1:
            problems.append("stall_generations must be >= 1")
        if self.n_scenarios < 1:
            problems.append("n_scenarios must be >= 1")
        if not 0.0 <= self.rule_mutation_rate <= 1.0:
            problems.append("rule_mutation_rate must lie in [0, 1]")
        if self.mf_mutation_sigma < 0:
            problems.append("mf_mutation_sigma must be >= 0")
        if self.gamma < 1:
            problems.append("gamma must be >= 1")
        if self.n_jobs < 1:
            problems.append("n_jobs must be >= 1")
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GaConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown GA config keys: {sorted(unknown)}")
        return cls(**data)

    @property
    def offspring_counts(self) -> tuple[int, int]:
        rest = self.population_size - self.elite_count
        n_cross = int(round(self.crossover_fraction * rest))
        return n_cross, rest - n_cross


def rank_weights(costs) -> np.ndarray:
    """Selection weights proportional to 1/sqrt(rank), best rank = 1."""
    order = np.argsort(costs, kind="stable")
    ranks = np.empty(len(costs))
    ranks[order] = np.arange(1, len(costs) + 1)
    w = 1.0 / np.sqrt(ranks)
    return w / w.sum()


def roulette(weights, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` parent indices drawn with probability proportional to ``weights``."""
    edges = np.cumsum(weights)
    edges /= edges[-1]
    return np.minimum(np.searchsorted(edges, rng.random(n), side="right"), len(edges) - 1)


def scattered_crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    mask = rng.random(a.shape) < 0.5
    return np.where(mask, a, b)


def mutate(genes: np.ndarray, config: GaConfig, rng: np.random.Generator) -> np.ndarray:
    g = genes.copy()
    redraw = rng.random(N_RULE_GENES) < config.rule_mutation_rate
    g[:N_RULE_GENES][redraw] = rng.integers(1, N_OUTPUT_MFS + 1, size=int(redraw.sum()))
    g[N_RULE_GENES:] += rng.normal(0.0, config.mf_mutation_sigma, size=N_MF_GENES)
    return repair(g)


@dataclass
class GenerationStats:
    generation: int
    best: float
    mean: float


@dataclass
class EvolutionResult:
    best: Chromosome
    best_fitness: float
    history: list[GenerationStats] = field(default_factory=list)
    stopped_by: str = "max_generations"


def _evaluate(args):
    genes, scenarios, gamma, seed, hard_limit = args
    return fitness(Chromosome.from_array(genes), scenarios, gamma, seed, hard_limit)


def evaluate_population(population: np.ndarray, scenarios, config: GaConfig,
                        executor=None) -> np.ndarray:
    jobs = [(g, scenarios, config.gamma, config.seed, config.hard_limit) for g in population]
    if executor is None:
        return np.array([_evaluate(j) for j in jobs])
    return np.array(list(executor.map(_evaluate, jobs)))


def evolve(
    config: GaConfig,
    scenarios: Sequence[Scenario],
    initial_population: Sequence[Chromosome] | None = None,
    callback: Callable[[GenerationStats], None] | None = None,
) -> EvolutionResult:
    """Generational GA with elitism, rank-scaled roulette selection and stall stopping.

    ``scenarios`` is used as-is; trim it to ``config.n_scenarios`` beforehand.
    ``initial_population`` entries replace the first random individuals.
    """
    config.validate()
    if not scenarios:
        raise ValueError("need at least one training scenario")
    rng = np.random.default_rng([config.seed, 0xA5])
    pop = np.array([random_chromosome(rng).to_array() for _ in range(config.population_size)])
    for i, c in enumerate(initial_population or ()):
        if i >= config.population_size:
            break
        pop[i] = c.to_array()
    n_cross, n_mut = config.offspring_counts

    executor = ProcessPoolExecutor(config.n_jobs) if config.n_jobs > 1 else None
    history: list[GenerationStats] = []
    best_genes, best_cost = None, np.inf
    last_improvement = 0
    stopped_by = "max_generations"
    try:
        costs = evaluate_population(pop, scenarios, config, executor)
        for gen in range(config.max_generations):
            if gen > 0:
                order = np.argsort(costs, kind="stable")
                elites = pop[order[:config.elite_count]]
                elite_costs = costs[order[:config.elite_count]]
                parents = roulette(rank_weights(costs), 2 * n_cross + n_mut, rng)
                children = [
                    repair(scattered_crossover(pop[parents[2 * i]], pop[parents[2 * i + 1]], rng))
                    for i in range(n_cross)
                ]
                children += [mutate(pop[p], config, rng) for p in parents[2 * n_cross:]]
                children = np.array(children).reshape(-1, pop.shape[1])
                child_costs = evaluate_population(children, scenarios, config, executor)
                pop = np.vstack([elites, children])
                costs = np.concatenate([elite_costs, child_costs])

            i_best = int(np.argmin(costs))
            if costs[i_best] < best_cost:
                best_cost, best_genes = float(costs[i_best]), pop[i_best].copy()
                last_improvement = gen
            stats = GenerationStats(gen, float(costs.min()), float(costs.mean()))
            history.append(stats)
            log.info("generation %d: best %.4f mean %.4f", gen, stats.best, stats.mean)
            if callback is not None:
                callback(stats)
            if gen - last_improvement >= config.stall_generations:
                stopped_by = "stall"
                break
    finally:
        if executor is not None:
            executor.shutdown()
    return EvolutionResult(Chromosome.from_array(best_genes), best_cost, history, stopped_by)
