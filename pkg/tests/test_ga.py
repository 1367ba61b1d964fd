import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzysched.assignment import Schedule
from fuzzysched.ga import (
    CHROMOSOME_LENGTH,
    Chromosome,
    GaConfig,
    decode,
    deltas,
    encode,
    evolve,
    fitness,
    mutate,
    random_chromosome,
    rank_weights,
    repair,
    rms,
    roulette,
    scattered_crossover,
)
from fuzzysched.scenario import N_SLOTS, SLOTS, Scenario, WorkerSpec

from conftest import make_scenario
from oracles import rms_loop

CANONICAL_MF = (0.25, 0.5, 0.75, 1.0, 0.25, 0.25, 0.25, 0.25, 0.25)


def block_schedule(n_workers, blocks):
    """Schedule from {worker: [(day, first_hour, length), ...]}."""
    a = np.zeros((n_workers, N_SLOTS), dtype=int)
    for w, items in blocks.items():
        for day, start, length in items:
            first = next(s.index for s in SLOTS if s.day == day and s.hour == start)
            a[w, first:first + length] = 1
    return Schedule(a)


# --- chromosome ------------------------------------------------------------


def test_length():
    c = random_chromosome(np.random.default_rng(0))
    assert len(c) == CHROMOSOME_LENGTH == 34
    assert len(c.to_array()) == 34


def test_invalid_genes_rejected():
    with pytest.raises(ValueError):
        Chromosome((0,) * 25, CANONICAL_MF)
    with pytest.raises(ValueError):
        Chromosome((1,) * 24, CANONICAL_MF)
    with pytest.raises(ValueError):
        Chromosome((1,) * 25, (float("nan"),) * 9)


def test_decode_uniform_medium():
    pair = decode(Chromosome((3,) * 25, CANONICAL_MF))
    assert set(pair.fis1.rules.as_array().ravel()) == {3}
    assert set(pair.fis2.rules.as_array().ravel()) == {3}
    assert pair.fis1.rules.shape == (4, 4) and pair.fis2.rules.shape == (3, 3)


def test_decode_row_major():
    genes = tuple(1 + (i % 5) for i in range(25))
    pair = decode(Chromosome(genes, CANONICAL_MF))
    assert pair.fis1.rules.consequents[1] == genes[4:8]
    assert pair.fis2.rules.consequents[2] == genes[22:25]


def test_decode_canonical_partition():
    out = decode(Chromosome((1,) * 25, CANONICAL_MF)).output
    expected = [(0, 0, .25), (0, .25, .5), (.25, .5, .75), (.5, .75, 1), (.75, 1, 1)]
    assert [(m.left, m.peak, m.right) for m in out.mfs] == expected


def test_decode_sorts_peaks():
    out = decode(Chromosome((1,) * 25, (0.9, 0.1, 0.5, 0.3) + (0.1,) * 5)).output
    assert [m.peak for m in out.mfs] == [0.0, 0.1, 0.3, 0.5, 0.9]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=25, max_size=25),
       st.lists(st.floats(-1, 2), min_size=9, max_size=9))
def test_decode_encode_idempotent(rules, mf):
    first = decode(Chromosome.from_array(np.array(rules + mf, float)))
    again = decode(encode(first))
    assert again == first
    assert encode(again) == encode(first)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_offspring_valid(seed):
    rng = np.random.default_rng(seed)
    a, b = random_chromosome(rng).to_array(), random_chromosome(rng).to_array()
    for genes in (repair(scattered_crossover(a, b, rng)), mutate(a, GaConfig(mf_mutation_sigma=2.0), rng)):
        c = Chromosome.from_array(genes)
        assert np.array_equal(c.to_array(), genes)
        assert all(0 <= g <= 1 for g in c.mf_genes)
        decode(c)


def test_crossover_takes_genes_from_parents():
    rng = np.random.default_rng(0)
    a, b = np.zeros(34), np.ones(34)
    child = scattered_crossover(a, b, rng)
    assert set(child) <= {0.0, 1.0} and 0 < child.sum() < 34


# --- deltas / rms ----------------------------------------------------------


def test_rms_examples():
    assert rms([3, 4]) == pytest.approx(np.sqrt(12.5), abs=1e-15)
    assert rms([0, 0, 0]) == 0.0
    assert rms([]) == 0.0


@given(st.lists(st.floats(-1e3, 1e3), max_size=60))
def test_rms_matches_loop(values):
    assert rms(values) == pytest.approx(rms_loop(values), abs=1e-12, rel=1e-12)


def test_deltas_all_zero():
    sc = make_scenario(np.ones((2, N_SLOTS), dtype=int), weekly=[6, 4], shift=[3, 4])
    sched = block_schedule(2, {0: [(0, 0, 3), (2, 4, 3)], 1: [(4, 0, 4)]})
    d1, d2, d3 = deltas(sched, sc)
    assert not d1.any() and not d2.any() and not d3.any()
    assert len(d1) == 3 and len(d2) == 2


def test_deltas_over_preference_within_limit():
    sc = make_scenario(np.ones((1, N_SLOTS), dtype=int), weekly=8, shift=5)
    sched = block_schedule(1, {0: [(0, 0, 5), (1, 0, 5)]})
    d1, d2, d3 = deltas(sched, sc)
    assert list(d2) == [2] and list(d3) == [0] and list(d1) == [0, 0]


def test_deltas_over_limit():
    sc = make_scenario(np.ones((1, N_SLOTS), dtype=int), weekly=20, shift=8)
    sched = block_schedule(1, {0: [(0, 0, 11), (1, 0, 11), (2, 0, 5)]})
    d1, d2, d3 = deltas(sched, sc)
    assert list(d3) == [2] and list(d2) == [7] and list(d1) == [3, 3, -3]


def test_deltas_skip_unassigned_days():
    sc = make_scenario(np.ones((2, N_SLOTS), dtype=int), weekly=5, shift=5)
    sched = block_schedule(2, {0: [(3, 0, 2)]})
    d1, d2, _ = deltas(sched, sc)
    assert list(d1) == [-3]
    assert list(d2) == [-3, -5]


# --- fitness ---------------------------------------------------------------


def _forced_scenario(weekly, shift):
    # exactly four workers, all always available: every slot assigns all of them
    return make_scenario(np.ones((4, N_SLOTS), dtype=int), weekly=weekly, shift=shift, limit=51,
                         coverage=4)


def test_fitness_zero():
    # nobody available and nobody wants hours: every delta list is empty or zero
    workers = tuple(WorkerSpec(f"w{i}", 0, 1) for i in range(4))
    sc = Scenario(workers, np.zeros((4, N_SLOTS), dtype=int))
    assert fitness(random_chromosome(np.random.default_rng(0)), [sc]) == 0.0


def test_fitness_mean_over_scenarios():
    # scenario A: nobody available, weekly prefs (4, 0, 0, 0) -> RMS(d2) = sqrt(16/4) = 2
    # scenario B: nobody available, weekly prefs (6, 6, 6, 6) -> RMS(d2) = 6; mean of 2 and 6 is 4
    def idle(prefs):
        ws = tuple(WorkerSpec(f"w{i}", p, 3) for i, p in enumerate(prefs))
        return Scenario(ws, np.zeros((len(prefs), N_SLOTS), dtype=int))

    c = random_chromosome(np.random.default_rng(3))
    assert fitness(c, [idle([4, 0, 0, 0])]) == pytest.approx(2.0, abs=1e-15)
    assert fitness(c, [idle([6, 6, 6, 6])]) == pytest.approx(6.0, abs=1e-15)
    assert fitness(c, [idle([4, 0, 0, 0]), idle([6, 6, 6, 6])]) == pytest.approx(4.0, abs=1e-15)


def test_fitness_deterministic(scenarios20):
    c = random_chromosome(np.random.default_rng(9))
    assert fitness(c, scenarios20, 3.0, 5) == fitness(c, scenarios20, 3.0, 5)


def test_fitness_needs_scenarios():
    with pytest.raises(ValueError):
        fitness(random_chromosome(np.random.default_rng(0)), [])


def test_limit_penalty_strict():
    # 4 always-available workers must cover all 51 slots: 51 h each
    low = _forced_scenario(weekly=20, shift=8)
    over = make_scenario(np.ones((4, N_SLOTS), dtype=int), weekly=20, shift=8, limit=25)
    c = random_chromosome(np.random.default_rng(1))
    assert fitness(c, [over]) > fitness(c, [low])
    assert fitness(c, [over]) - fitness(c, [low]) == pytest.approx(26.0)


# --- GA machinery ----------------------------------------------------------


def test_rank_weights():
    w = rank_weights([3.0, 1.0, 2.0])
    expected = np.array([1 / np.sqrt(3), 1.0, 1 / np.sqrt(2)])
    np.testing.assert_allclose(w, expected / expected.sum())


def test_roulette_frequencies():
    w = np.array([0.5, 0.3, 0.2])
    picks = roulette(w, 20000, np.random.default_rng(0))
    np.testing.assert_allclose(np.bincount(picks) / 20000, w, atol=0.015)


def test_offspring_accounting():
    assert GaConfig().offspring_counts == (152, 38)


@pytest.mark.parametrize("kwargs", [
    dict(elite_count=200), dict(crossover_fraction=1.5), dict(population_size=1),
    dict(max_generations=0), dict(gamma=0.5), dict(stall_generations=0),
])
def test_config_rejected(kwargs, scenarios20):
    with pytest.raises(ValueError):
        evolve(GaConfig(**kwargs), scenarios20)


def test_config_roundtrip():
    cfg = GaConfig(population_size=12, seed=4)
    assert GaConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        GaConfig.from_dict({"bogus": 1})


def test_single_generation(scenarios20):
    r = evolve(GaConfig(population_size=8, elite_count=2, max_generations=1), scenarios20[:2])
    assert len(r.history) == 1
    assert r.best_fitness == r.history[0].best


def test_elite_survives(scenarios20):
    """An individual with cost 0 must stay the best."""
    idle = [Scenario(tuple(WorkerSpec(f"w{i}", 0, 3) for i in range(5)),
                     np.zeros((5, N_SLOTS), dtype=int))]
    seeded = random_chromosome(np.random.default_rng(0))
    r = evolve(GaConfig(population_size=10, elite_count=2, max_generations=4, stall_generations=10),
               idle, initial_population=[seeded])
    assert r.best_fitness == 0.0
    assert all(h.best == 0.0 for h in r.history)


def test_evolve_monotone_and_improves(scenarios20):
    cfg = GaConfig(population_size=20, elite_count=2, max_generations=6, seed=3)
    r = evolve(cfg, scenarios20[:3])
    bests = [h.best for h in r.history]
    assert all(b2 <= b1 for b1, b2 in zip(bests, bests[1:]))
    assert bests[-1] <= bests[0]
    assert r.best_fitness == pytest.approx(fitness(r.best, scenarios20[:3], cfg.gamma, cfg.seed))


def test_stall_stopping():
    idle = [Scenario(tuple(WorkerSpec(f"w{i}", 3, 3) for i in range(5)),
                     np.zeros((5, N_SLOTS), dtype=int))]
    # every chromosome costs the same, so no generation after the first improves
    r = evolve(GaConfig(population_size=6, elite_count=1, max_generations=30, stall_generations=3),
               idle)
    assert r.stopped_by == "stall"
    assert len(r.history) == 4


def test_evolve_reproducible(scenarios20):
    cfg = GaConfig(population_size=10, elite_count=2, max_generations=3, seed=8)
    a = evolve(cfg, scenarios20[:2])
    b = evolve(cfg, scenarios20[:2])
    assert a.best == b.best and [h.best for h in a.history] == [h.best for h in b.history]
