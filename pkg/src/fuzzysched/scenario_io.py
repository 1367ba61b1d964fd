"""Scenario/pool generation and the CSV/JSON file formats.

Files:

* availability CSV: ``day,hour`` then one 0/1 column per worker, one row per slot
* preferences CSV: ``worker,preferred_weekly_hours,preferred_shift_length,weekly_limit``
* scenario JSON bundle: workers, preferences and the availability matrix
* model JSON: fuzzy system definition plus training metadata
* schedule CSV: per-worker summary table
"""

from __future__ import annotations

import copy
import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assignment import Schedule, Shortfall
from .fuzzy import (
    FIS1_LABELS,
    FIS2_LABELS,
    OUTPUT_LABELS,
    Fis,
    FisPair,
    InputPartition,
    OutputPartition,
    RuleTable,
    TriangularMf,
)
from .scenario import (
    DAY_NAMES,
    DEFAULT_WEEKLY_LIMIT,
    N_DAYS,
    N_SLOTS,
    SLOTS,
    Scenario,
    WorkerSpec,
    hour_label,
)

MODEL_FORMAT_VERSION = 1
SCENARIO_FORMAT_VERSION = 1
PREFERRED_WEEKLY_RANGE = (5, 15)
PREFERRED_SHIFT_RANGE = (3, 8)
DEFAULT_DENSITY = (0.55, 0.95)


class FormatError(ValueError):
    """A file does not match its expected layout."""


class VersionError(FormatError):
    pass


# --- generation ------------------------------------------------------------


def generate_pool(size: int, density_range=DEFAULT_DENSITY, rng=None) -> np.ndarray:
    """Synthetic (size, 51) availability; each worker has its own density."""
    lo, hi = density_range
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError(f"invalid density range {density_range}")
    if size < 1:
        raise ValueError("pool size must be >= 1")
    rng = np.random.default_rng(rng)
    density = rng.uniform(lo, hi, size=size)
    return (rng.random((size, N_SLOTS)) < density[:, None]).astype(np.int8)


def generate_scenario(pool: np.ndarray, worker_count: int, rng=None,
                      weekly_limit: int = DEFAULT_WEEKLY_LIMIT, coverage_required: int = 4,
                      pool_ids=None) -> Scenario:
    pool = np.asarray(pool)
    if not 1 <= worker_count <= len(pool):
        raise ValueError(f"cannot draw {worker_count} workers from a pool of {len(pool)}")
    rng = np.random.default_rng(rng)
    picked = np.sort(rng.choice(len(pool), size=worker_count, replace=False))
    weekly = rng.integers(PREFERRED_WEEKLY_RANGE[0], PREFERRED_WEEKLY_RANGE[1] + 1, worker_count)
    shift = rng.integers(PREFERRED_SHIFT_RANGE[0], PREFERRED_SHIFT_RANGE[1] + 1, worker_count)
    ids = pool_ids if pool_ids is not None else [f"W{i + 1:03d}" for i in range(len(pool))]
    workers = tuple(
        WorkerSpec(ids[p], int(w), int(s), weekly_limit) for p, w, s in zip(picked, weekly, shift)
    )
    return Scenario(workers, pool[picked], coverage_required)


# --- availability / preference CSV -----------------------------------------


def _write_csv(rows, path):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    Path(path).write_text(buf.getvalue())


def _read_csv(path):
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row]


def save_availability(matrix: np.ndarray, worker_ids, path) -> None:
    """Slots as rows, workers as columns; the day name appears on each day's first row."""
    matrix = np.asarray(matrix)
    rows = [["day", "hour", *worker_ids]]
    for slot in SLOTS:
        day = DAY_NAMES[slot.day] if slot.starts_day else ""
        rows.append([day, hour_label(slot.hour), *(int(v) for v in matrix[:, slot.index])])
    _write_csv(rows, path)


def load_availability(path) -> tuple[list[str], np.ndarray]:
    rows = _read_csv(path)
    if not rows or rows[0][:2] != ["day", "hour"]:
        raise FormatError(f"{path}: header must start with 'day,hour'")
    ids = rows[0][2:]
    if not ids:
        raise FormatError(f"{path}: no worker columns")
    body = rows[1:]
    if len(body) != N_SLOTS:
        raise FormatError(f"{path}: expected {N_SLOTS} slot rows, found {len(body)}")
    out = np.zeros((len(ids), N_SLOTS), dtype=np.int8)
    for r, row in enumerate(body, start=2):
        if len(row) != len(ids) + 2:
            raise FormatError(
                f"{path}: row {r} has {len(row)} columns, expected {len(ids) + 2}"
            )
        for c, value in enumerate(row[2:]):
            if value.strip() not in ("0", "1"):
                raise FormatError(
                    f"{path}: row {r}, column {c + 3} ({ids[c]}): "
                    f"availability must be 0 or 1, got {value!r}"
                )
            out[c, r - 2] = int(value)
    return ids, out


def _parse_matrix_rows(rows, path) -> np.ndarray:
    out = np.zeros((len(rows), N_SLOTS), dtype=np.int8)
    for r, row in enumerate(rows, start=1):
        if not isinstance(row, str):
            raise FormatError(f"{path}: availability row {r} must be a string of 0/1")
        if len(row) != N_SLOTS:
            raise FormatError(f"{path}: availability row {r} has {len(row)} columns, expected {N_SLOTS}")
        for c, v in enumerate(row, start=1):
            if v not in "01":
                raise FormatError(f"{path}: availability row {r}, column {c}: must be 0 or 1, got {v!r}")
            out[r - 1, c - 1] = int(v)
    return out


def save_preferences(workers, path) -> None:
    rows = [["worker", "preferred_weekly_hours", "preferred_shift_length", "weekly_limit"]]
    rows += [[w.id, w.preferred_weekly_hours, w.preferred_shift_length, w.weekly_limit] for w in workers]
    _write_csv(rows, path)


def _make_worker(wid, weekly, shift, limit, where):
    try:
        return WorkerSpec(wid, weekly, shift, limit)
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


def load_preferences(path) -> list[WorkerSpec]:
    rows = _read_csv(path)
    header = ["worker", "preferred_weekly_hours", "preferred_shift_length", "weekly_limit"]
    if not rows or rows[0] != header:
        raise FormatError(f"{path}: header must be {','.join(header)}")
    workers = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise FormatError(f"{path}: row {r} has {len(row)} columns, expected 4")
        try:
            weekly, shift, limit = (int(v) for v in row[1:])
        except ValueError:
            raise FormatError(f"{path}: row {r}: preferences must be integers") from None
        workers.append(_make_worker(row[0], weekly, shift, limit, f"{path}: row {r}"))
    return workers


# --- scenarios -------------------------------------------------------------


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "format_version": SCENARIO_FORMAT_VERSION,
        "coverage_required": scenario.coverage_required,
        "workers": [
            {
                "id": w.id,
                "preferred_weekly_hours": w.preferred_weekly_hours,
                "preferred_shift_length": w.preferred_shift_length,
                "weekly_limit": w.weekly_limit,
            }
            for w in scenario.workers
        ],
        # one string of 0/1 characters per worker, in slot order
        "availability": ["".join(map(str, row)) for row in scenario.availability.astype(int)],
    }


def scenario_from_dict(data: dict, path="<scenario>") -> Scenario:
    if data.get("format_version") != SCENARIO_FORMAT_VERSION:
        raise VersionError(f"{path}: unsupported scenario format version {data.get('format_version')!r}")
    try:
        workers = [
            _make_worker(w["id"], w["preferred_weekly_hours"], w["preferred_shift_length"],
                         w.get("weekly_limit", DEFAULT_WEEKLY_LIMIT), f"{path}: worker {i + 1}")
            for i, w in enumerate(data["workers"])
        ]
        matrix = data["availability"]
        coverage = data.get("coverage_required", 4)
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from None
    if len(matrix) != len(workers):
        raise FormatError(f"{path}: {len(matrix)} availability rows for {len(workers)} workers")
    return Scenario(tuple(workers), _parse_matrix_rows(matrix, path), coverage)


def _dump_json(data, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def save_scenario(scenario: Scenario, path) -> None:
    """JSON bundle for ``.json`` paths; otherwise availability CSV plus ``<stem>_prefs.csv``."""
    path = Path(path)
    if path.suffix == ".json":
        _dump_json(scenario_to_dict(scenario), path)
    else:
        save_availability(scenario.availability, [w.id for w in scenario.workers], path)
        save_preferences(scenario.workers, prefs_path_for(path))


def prefs_path_for(path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_prefs.csv")


def load_scenario(path, prefs_path=None) -> Scenario:
    path = Path(path)
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from None
        return scenario_from_dict(data, path)
    ids, matrix = load_availability(path)
    prefs_path = Path(prefs_path) if prefs_path else prefs_path_for(path)
    workers = {w.id: w for w in load_preferences(prefs_path)}
    missing = [i for i in ids if i not in workers]
    if missing:
        raise FormatError(f"{prefs_path}: no preferences for workers {missing}")
    return Scenario(tuple(workers[i] for i in ids), matrix)


# --- models ----------------------------------------------------------------


@dataclass
class ModelFile:
    fis_pair: FisPair
    gamma: float
    training: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)  # free-form, e.g. timestamps
    version: int = MODEL_FORMAT_VERSION

    def __eq__(self, other):
        if not isinstance(other, ModelFile):
            return NotImplemented
        return (self.fis_pair == other.fis_pair and self.gamma == other.gamma
                and self.training == other.training and self.version == other.version)


def _mf_dict(mf: TriangularMf, label: str) -> dict:
    return {"label": label, "left": mf.left, "peak": mf.peak, "right": mf.right}


def _partition_dict(p: InputPartition) -> dict:
    return {
        "name": p.name,
        "domain": [p.domain_min, p.domain_max],
        "mfs": [_mf_dict(mf, lab) for mf, lab in zip(p.mfs, p.labels)],
    }


def model_to_dict(model: ModelFile) -> dict:
    pair = model.fis_pair
    fis = {}
    for key, f in (("fis1", pair.fis1), ("fis2", pair.fis2)):
        fis[key] = {
            "inputs": [_partition_dict(f.input1), _partition_dict(f.input2)],
            "rules": [list(row) for row in f.rules.consequents],
        }
    return {
        "format_version": model.version,
        "gamma": model.gamma,
        "output_mfs": [_mf_dict(mf, lab) for mf, lab in zip(pair.output.mfs, pair.output.labels)],
        **fis,
        "training": model.training,
        "metadata": model.metadata,
    }


def _get(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise FormatError(f"{where}: missing '{key}'")
    return d[key]


def _parse_mf(d, where) -> tuple[TriangularMf, str]:
    vals = []
    for k in ("left", "peak", "right"):
        v = _get(d, k, where)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise FormatError(f"{where}: '{k}' must be a number")
        vals.append(float(v))
    try:
        return TriangularMf(*vals), str(d.get("label", ""))
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


def _parse_partition(d, where, n_levels) -> InputPartition:
    dom = _get(d, "domain", where)
    mfs = _get(d, "mfs", where)
    if not isinstance(mfs, list) or len(mfs) != n_levels:
        raise FormatError(f"{where}: expected {n_levels} MFs")
    parsed = [_parse_mf(m, f"{where}.mfs[{i}]") for i, m in enumerate(mfs)]
    try:
        return InputPartition(str(_get(d, "name", where)), float(dom[0]), float(dom[1]),
                              tuple(m for m, _ in parsed), tuple(lab for _, lab in parsed))
    except (ValueError, TypeError, IndexError) as exc:
        raise FormatError(f"{where}: {exc}") from None


def _parse_rules(rows, where, shape) -> RuleTable:
    if not isinstance(rows, list) or len(rows) != shape[0]:
        raise FormatError(f"{where}: expected {shape[0]} rule rows")
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise FormatError(f"{where}: row {i + 1} is not a list")
        for j in range(shape[1]):
            if j >= len(row) or row[j] is None:
                raise FormatError(f"{where}: missing rule cell ({i + 1}, {j + 1})")
            v = row[j]
            if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= 5:
                raise FormatError(f"{where}: rule cell ({i + 1}, {j + 1}) must be an integer in 1..5")
        if len(row) != shape[1]:
            raise FormatError(f"{where}: row {i + 1} has {len(row)} cells, expected {shape[1]}")
    return RuleTable(tuple(tuple(r) for r in rows))


def model_from_dict(data: dict, path="<model>") -> ModelFile:
    version = data.get("format_version") if isinstance(data, dict) else None
    if version != MODEL_FORMAT_VERSION:
        raise VersionError(f"{path}: unsupported model format version {version!r}")
    outs = _get(data, "output_mfs", path)
    if not isinstance(outs, list) or len(outs) != len(OUTPUT_LABELS):
        raise FormatError(f"{path}: output_mfs must list {len(OUTPUT_LABELS)} MFs")
    out_mfs = [_parse_mf(m, f"{path}: output_mfs[{i}]") for i, m in enumerate(outs)]
    try:
        output = OutputPartition(tuple(m for m, _ in out_mfs), tuple(lab for _, lab in out_mfs))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    systems = []
    for key, levels in (("fis1", (len(FIS1_LABELS), len(FIS1_LABELS))),
                        ("fis2", (len(FIS2_LABELS), len(FIS2_LABELS)))):
        f = _get(data, key, path)
        inputs = _get(f, "inputs", f"{path}: {key}")
        if not isinstance(inputs, list) or len(inputs) != 2:
            raise FormatError(f"{path}: {key}.inputs must hold two partitions")
        in1 = _parse_partition(inputs[0], f"{path}: {key}.inputs[0]", levels[0])
        in2 = _parse_partition(inputs[1], f"{path}: {key}.inputs[1]", levels[1])
        rules = _parse_rules(_get(f, "rules", f"{path}: {key}"), f"{path}: {key}.rules", levels)
        systems.append(Fis(in1, in2, output, rules))
    gamma = _get(data, "gamma", path)
    if not isinstance(gamma, (int, float)) or gamma < 1:
        raise FormatError(f"{path}: gamma must be a number >= 1")
    return ModelFile(
        FisPair(*systems),
        float(gamma),
        copy.deepcopy(data.get("training", {})),
        copy.deepcopy(data.get("metadata", {})),
        version,
    )


def save_model(model: ModelFile, path) -> None:
    # json writes floats with the shortest repr that round-trips exactly
    _dump_json(model_to_dict(model), path)


def load_model(path) -> ModelFile:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(data, path)


# --- schedules -------------------------------------------------------------

SCHEDULE_HEADER = [
    "worker",
    "availability_pct",
    "requested_weekly",
    "assigned_weekly",
    "difference",
    "abs_difference",
    "requested_shift_length",
    *[f"day{d + 1}" for d in range(N_DAYS)],
]


@dataclass(frozen=True)
class ScheduleRow:
    worker: str
    availability_pct: float
    requested_weekly: int
    assigned_weekly: int
    difference: int
    abs_difference: int
    requested_shift_length: int
    daily: tuple[int, ...]

    def cells(self) -> list:
        return [
            self.worker,
            f"{self.availability_pct:.1f}",
            self.requested_weekly,
            self.assigned_weekly,
            self.difference,
            self.abs_difference,
            self.requested_shift_length,
            *self.daily,
        ]


def schedule_rows(schedule: Schedule, scenario: Scenario) -> list[ScheduleRow]:
    avail_pct = 100.0 * scenario.availability.mean(axis=1)
    weekly = schedule.weekly_hours
    daily = schedule.daily_hours
    rows = []
    for i, w in enumerate(scenario.workers):
        diff = int(weekly[i]) - w.preferred_weekly_hours
        rows.append(ScheduleRow(
            w.id, round(float(avail_pct[i]), 1), w.preferred_weekly_hours, int(weekly[i]),
            diff, abs(diff), w.preferred_shift_length, tuple(int(h) for h in daily[i]),
        ))
    return rows


def write_schedule_table(rows, path) -> None:
    _write_csv([SCHEDULE_HEADER] + [r.cells() for r in rows], path)


def save_schedule(schedule: Schedule, scenario: Scenario, path) -> None:
    """Per-worker summary: availability, weekly request vs assignment, hours per day."""
    write_schedule_table(schedule_rows(schedule, scenario), path)


def load_schedule_table(path) -> list[ScheduleRow]:
    rows = _read_csv(path)
    if not rows or rows[0] != SCHEDULE_HEADER:
        raise FormatError(f"{path}: unexpected schedule header")
    out = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(SCHEDULE_HEADER):
            raise FormatError(f"{path}: row {r} has {len(row)} columns, expected {len(SCHEDULE_HEADER)}")
        try:
            nums = [int(v) for v in row[2:]]
            pct = float(row[1])
        except ValueError:
            raise FormatError(f"{path}: row {r}: non-numeric value") from None
        out.append(ScheduleRow(row[0], pct, *nums[:5], tuple(nums[5:])))
    return out


def save_assignment(schedule: Schedule, scenario: Scenario, path) -> None:
    """Slot-level 0/1 assignment in the availability CSV layout."""
    save_availability(schedule.assigned, [w.id for w in scenario.workers], path)


def load_assignment(path, scenario: Scenario | None = None) -> Schedule:
    ids, matrix = load_availability(path)
    if scenario is not None and ids != [w.id for w in scenario.workers]:
        raise FormatError(f"{path}: worker columns do not match the scenario")
    coverage = scenario.coverage_required if scenario is not None else 4
    shortfalls = ()
    if scenario is not None:
        counts = scenario.availability.sum(axis=0)
        shortfalls = tuple(
            Shortfall(t, int(counts[t]), coverage - int(counts[t]))
            for t in range(N_SLOTS) if counts[t] < coverage
        )
    return Schedule(matrix, coverage, shortfalls)
