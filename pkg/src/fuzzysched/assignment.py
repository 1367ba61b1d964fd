"""Slot-by-slot schedule construction driven by the two FIS likelihoods."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fuzzy import FisPair
from .scenario import DAY_OF_SLOT, N_DAYS, N_SLOTS, SLOTS, Scenario, Slot, WorkerSpec

DEFAULT_GAMMA = 3.0


@dataclass(frozen=True)
class AssignmentState:
    weekly_hours: np.ndarray
    daily_hours: np.ndarray
    assigned_previous: np.ndarray
    day: int = 0

    @classmethod
    def initial(cls, n_workers: int) -> "AssignmentState":
        return cls(
            np.zeros(n_workers, dtype=int),
            np.zeros(n_workers, dtype=int),
            np.zeros(n_workers, dtype=bool),
            0,
        )

    def enter(self, slot: Slot) -> "AssignmentState":
        """State as seen when scoring ``slot``: new days start with clean daily tallies."""
        if slot.day == self.day:
            return self
        n = len(self.weekly_hours)
        return AssignmentState(
            self.weekly_hours, np.zeros(n, dtype=int), np.zeros(n, dtype=bool), slot.day
        )


def advance_state(state: AssignmentState, selected, slot: Slot) -> AssignmentState:
    state = state.enter(slot)
    sel = np.asarray(selected, dtype=int)
    weekly = state.weekly_hours.copy()
    daily = state.daily_hours.copy()
    weekly[sel] += 1
    daily[sel] += 1
    prev = np.zeros(len(weekly), dtype=bool)
    prev[sel] = True
    return AssignmentState(weekly, daily, prev, slot.day)


def assignment_scores(
    preferred_weekly: np.ndarray,
    preferred_shift: np.ndarray,
    weekly_limit: np.ndarray,
    state: AssignmentState,
    available: np.ndarray,
    fis_pair: FisPair,
    gamma: float = DEFAULT_GAMMA,
    hard_limit: bool = False,
) -> np.ndarray:
    """Ranking keys for all workers at one slot. Values above 1 are legal."""
    p1 = fis_pair.weekly_likelihood(preferred_weekly, state.weekly_hours)
    p2 = fis_pair.daily_likelihood(preferred_shift, state.daily_hours)
    adjacency = np.where(state.assigned_previous, gamma, 1.0)
    score = np.asarray(available, dtype=float) * np.minimum(p1, p2) * adjacency
    if hard_limit:
        score = np.where(state.weekly_hours >= weekly_limit, 0.0, score)
    return score


def assignment_score(
    worker: WorkerSpec,
    index: int,
    state: AssignmentState,
    available: int,
    fis_pair: FisPair,
    gamma: float = DEFAULT_GAMMA,
) -> float:
    """Score of a single worker; ``index`` locates the worker in ``state``."""
    s = assignment_scores(
        np.array([worker.preferred_weekly_hours]),
        np.array([worker.preferred_shift_length]),
        np.array([worker.weekly_limit]),
        AssignmentState(
            state.weekly_hours[index : index + 1],
            state.daily_hours[index : index + 1],
            state.assigned_previous[index : index + 1],
            state.day,
        ),
        np.array([available]),
        fis_pair,
        gamma,
    )
    return float(s[0])


def select_top_k(scores, k: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Indices of the ``k`` best positive scores and the shortfall below ``k``.

    Ties are broken by random keys drawn from ``rng``; one key per worker is
    drawn on every call so the stream advances identically regardless of scores.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = np.asarray(scores, dtype=float)
    keys = rng.random(len(scores))
    positive = np.flatnonzero(scores > 0)
    order = np.lexsort((keys[positive], -scores[positive]))
    chosen = np.sort(positive[order[:k]])
    return chosen, k - len(chosen)


@dataclass(frozen=True)
class Shortfall:
    slot: int
    available: int
    missing: int


@dataclass(frozen=True, eq=False)
class Schedule:
    assigned: np.ndarray  # (workers, N_SLOTS), 0/1
    coverage_required: int = 4
    shortfalls: tuple[Shortfall, ...] = field(default=())

    def __post_init__(self):
        a = np.asarray(self.assigned, dtype=np.int8)
        a.flags.writeable = False
        object.__setattr__(self, "assigned", a)

    def __eq__(self, other):
        if not isinstance(other, Schedule):
            return NotImplemented
        return (
            np.array_equal(self.assigned, other.assigned)
            and self.coverage_required == other.coverage_required
            and self.shortfalls == other.shortfalls
        )

    @property
    def weekly_hours(self) -> np.ndarray:
        return self.assigned.sum(axis=1).astype(int)

    @property
    def daily_hours(self) -> np.ndarray:
        """(workers, N_DAYS) hours per day."""
        out = np.zeros((self.assigned.shape[0], N_DAYS), dtype=int)
        for d in range(N_DAYS):
            out[:, d] = self.assigned[:, DAY_OF_SLOT == d].sum(axis=1)
        return out

    def check(self, scenario: Scenario) -> None:
        """Raise AssertionError if a structural invariant is broken."""
        a, avail = self.assigned, scenario.availability
        assert a.shape == avail.shape, "shape mismatch"
        assert np.all(a <= avail), "assignment outside availability"
        expected = np.minimum(self.coverage_required, avail.sum(axis=0))
        assert np.array_equal(a.sum(axis=0), expected), "coverage mismatch"
        assert np.array_equal(self.daily_hours.sum(axis=1), self.weekly_hours)


def _fill_zero_scores(chosen, missing, available, state, limit, hard_limit, rng):
    # an available worker whose likelihood underflows to 0 still counts toward coverage
    eligible = available.astype(bool).copy()
    eligible[chosen] = False
    if hard_limit:
        eligible &= state.weekly_hours < limit
    extra = np.flatnonzero(eligible)
    if len(extra) == 0:
        return chosen
    extra = rng.permutation(extra)[:missing]
    return np.sort(np.concatenate([chosen, extra]))


def build_schedule(
    scenario: Scenario,
    fis_pair: FisPair,
    gamma: float = DEFAULT_GAMMA,
    rng: np.random.Generator | int | None = None,
    hard_limit: bool = False,
) -> Schedule:
    """Assign workers to the 51 slots in calendar order."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    rng = np.random.default_rng(rng)
    pref_week = scenario.column("preferred_weekly_hours")
    pref_shift = scenario.column("preferred_shift_length")
    limit = scenario.column("weekly_limit")
    k = scenario.coverage_required
    state = AssignmentState.initial(scenario.n_workers)
    assigned = np.zeros((scenario.n_workers, N_SLOTS), dtype=np.int8)
    shortfalls = []
    for slot in SLOTS:
        state = state.enter(slot)
        available = scenario.availability[:, slot.index]
        scores = assignment_scores(
            pref_week, pref_shift, limit, state, available, fis_pair, gamma, hard_limit
        )
        chosen, missing = select_top_k(scores, k, rng)
        if missing:
            chosen = _fill_zero_scores(chosen, missing, available, state, limit, hard_limit, rng)
            missing = k - len(chosen)
        n_avail = int(available.sum())
        if n_avail < k:
            shortfalls.append(Shortfall(slot.index, n_avail, k - n_avail))
        elif missing:
            # only reachable with hard_limit masking out available workers
            shortfalls.append(Shortfall(slot.index, n_avail, missing))
        assigned[chosen, slot.index] = 1
        state = advance_state(state, chosen, slot)
    return Schedule(assigned, k, tuple(shortfalls))
