"""Weekly calendar, worker preferences and scenario container."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri")
DAY_LENGTHS = (11, 11, 11, 11, 7)
FIRST_HOUR = (8, 30)
N_DAYS = len(DAY_LENGTHS)
N_SLOTS = sum(DAY_LENGTHS)
DEFAULT_COVERAGE = 4
DEFAULT_WEEKLY_LIMIT = 25
REQUIRED_WORKER_HOURS = N_SLOTS * DEFAULT_COVERAGE

if N_SLOTS != 51 or REQUIRED_WORKER_HOURS != 204:
    raise ImportError("calendar constants are inconsistent")


class Slot(NamedTuple):
    index: int
    day: int  # 0-based
    hour: int  # 0-based within the day

    @property
    def starts_day(self) -> bool:
        return self.hour == 0

    @property
    def label(self) -> str:
        return f"{DAY_NAMES[self.day]} {hour_label(self.hour)}"


def _clock(minutes: int) -> str:
    h, m = divmod(minutes, 60)
    suffix = "AM" if h < 12 else "PM"
    return f"{(h - 1) % 12 + 1}:{m:02d} {suffix}"


def hour_label(hour: int) -> str:
    start = FIRST_HOUR[0] * 60 + FIRST_HOUR[1] + 60 * hour
    return f"{_clock(start)} - {_clock(start + 60)}"


SLOTS = tuple(
    Slot(sum(DAY_LENGTHS[:d]) + h, d, h) for d in range(N_DAYS) for h in range(DAY_LENGTHS[d])
)
DAY_OF_SLOT = np.array([s.day for s in SLOTS])


@dataclass(frozen=True)
class WorkerSpec:
    id: str
    preferred_weekly_hours: int
    preferred_shift_length: int
    weekly_limit: int = DEFAULT_WEEKLY_LIMIT

    def __post_init__(self):
        if self.preferred_shift_length < 1:
            raise ValueError(f"worker {self.id}: preferred shift length must be >= 1")
        if not 0 <= self.preferred_weekly_hours <= self.weekly_limit:
            raise ValueError(
                f"worker {self.id}: preferred weekly hours {self.preferred_weekly_hours} "
                f"outside [0, {self.weekly_limit}]"
            )


@dataclass(frozen=True, eq=False)
class Scenario:
    workers: tuple[WorkerSpec, ...]
    availability: np.ndarray  # (workers, N_SLOTS), 0/1
    coverage_required: int = DEFAULT_COVERAGE

    def __post_init__(self):
        avail = np.asarray(self.availability)
        if avail.ndim != 2 or avail.shape != (len(self.workers), N_SLOTS):
            raise ValueError(
                f"availability must be ({len(self.workers)}, {N_SLOTS}), got {avail.shape}"
            )
        if not np.isin(avail, (0, 1)).all():
            raise ValueError("availability entries must be 0 or 1")
        if self.coverage_required < 1:
            raise ValueError("coverage_required must be >= 1")
        avail = avail.astype(np.int8)
        avail.flags.writeable = False
        object.__setattr__(self, "workers", tuple(self.workers))
        object.__setattr__(self, "availability", avail)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.workers == other.workers
            and self.coverage_required == other.coverage_required
            and np.array_equal(self.availability, other.availability)
        )

    @property
    def n_workers(self) -> int:
        return len(self.workers)

    @property
    def slots(self) -> tuple[Slot, ...]:
        return SLOTS

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(w, name) for w in self.workers], dtype=int)

    @property
    def requested_hours(self) -> int:
        return int(sum(w.preferred_weekly_hours for w in self.workers))

    @property
    def required_hours(self) -> int:
        return N_SLOTS * self.coverage_required

    @property
    def understaffed(self) -> bool:
        return self.requested_hours < self.required_hours
