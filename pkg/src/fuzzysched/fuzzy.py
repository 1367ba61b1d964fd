"""Mamdani inference with triangular membership functions.

Two-input systems only: rules fire with ``min`` (AND), consequents are clipped
at the firing strength, clipped sets are combined with ``max`` and the result
is defuzzified by centroid on a uniform grid over [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

GRID_POINTS = 1001
EMPTY_CENTROID = 0.5

FIS1_LABELS = ("Very Low", "Low", "High", "Very High")
FIS2_LABELS = ("Low", "Medium", "High")
OUTPUT_LABELS = ("Very Low", "Low", "Medium", "High", "Very High")
N_OUTPUT_MFS = len(OUTPUT_LABELS)


@dataclass(frozen=True)
class TriangularMf:
    left: float
    peak: float
    right: float

    def __post_init__(self):
        if not (self.left <= self.peak <= self.right):
            raise ValueError(
                f"triangle corners out of order: ({self.left}, {self.peak}, {self.right})"
            )

    def __call__(self, x):
        return membership(self, x)


def membership(mf: TriangularMf, x):
    """Degree of ``x`` in ``mf``; accepts scalars or arrays.

    Degenerate edges are allowed: a zero-width side is a vertical edge, and a
    spike (all corners equal) is 1 at the peak and 0 elsewhere.
    """
    arr = np.asarray(x, dtype=float)
    deg = np.zeros(arr.shape)
    left, peak, right = mf.left, mf.peak, mf.right
    if peak > left:
        m = (arr > left) & (arr < peak)
        deg[m] = (arr[m] - left) / (peak - left)
    if right > peak:
        m = (arr > peak) & (arr < right)
        deg[m] = (right - arr[m]) / (right - peak)
    deg[arr == peak] = 1.0
    if deg.ndim == 0:
        return float(deg)
    return deg


@dataclass(frozen=True)
class InputPartition:
    name: str
    domain_min: float
    domain_max: float
    mfs: tuple[TriangularMf, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.domain_max < self.domain_min:
            raise ValueError(f"{self.name}: empty domain")
        if len(self.mfs) != len(self.labels):
            raise ValueError(f"{self.name}: {len(self.mfs)} MFs but {len(self.labels)} labels")
        peaks = [mf.peak for mf in self.mfs]
        if any(b < a for a, b in zip(peaks, peaks[1:])):
            raise ValueError(f"{self.name}: MF peaks must be non-decreasing")
        # coverage: every point of the domain must belong to some MF
        xs = np.linspace(self.domain_min, self.domain_max, 2001)
        if not np.all(self.fuzzify(xs).max(axis=-1) > 0):
            raise ValueError(f"{self.name}: MFs leave part of the domain uncovered")

    def __len__(self):
        return len(self.mfs)

    def clamp(self, x):
        return np.clip(x, self.domain_min, self.domain_max)

    def fuzzify(self, x):
        """Degrees for each MF; the last axis indexes the MFs."""
        xc = self.clamp(np.asarray(x, dtype=float))
        return np.stack([membership(mf, xc) for mf in self.mfs], axis=-1)


def fuzzify(partition: InputPartition, x):
    return partition.fuzzify(x)


def even_partition(name, domain_min, domain_max, labels):
    """Evenly spaced triangles, each reaching to its neighbours' peaks.

    The end triangles are half triangles anchored at the domain edges, which
    acts as a shoulder once inputs are clamped.
    """
    peaks = np.linspace(domain_min, domain_max, len(labels))
    mfs = []
    for i, p in enumerate(peaks):
        left = peaks[i - 1] if i > 0 else p
        right = peaks[i + 1] if i < len(peaks) - 1 else p
        mfs.append(TriangularMf(float(left), float(p), float(right)))
    return InputPartition(name, float(domain_min), float(domain_max), tuple(mfs), tuple(labels))


def default_fis1_inputs():
    return (
        even_partition("preferred hours per week", 0.0, 25.0, FIS1_LABELS),
        even_partition("assigned hours per week", 0.0, 25.0, FIS1_LABELS),
    )


def default_fis2_inputs():
    return (
        even_partition("preferred shift length", 1.0, 8.0, FIS2_LABELS),
        even_partition("assigned hours per day", 0.0, 11.0, FIS2_LABELS),
    )


@dataclass(frozen=True)
class OutputPartition:
    mfs: tuple[TriangularMf, ...]
    labels: tuple[str, ...] = OUTPUT_LABELS

    def __post_init__(self):
        if len(self.mfs) != N_OUTPUT_MFS:
            raise ValueError(f"output partition needs {N_OUTPUT_MFS} MFs, got {len(self.mfs)}")
        for mf in self.mfs:
            if mf.left < 0.0 or mf.right > 1.0:
                raise ValueError(f"output MF {mf} leaves [0, 1]")
        peaks = [mf.peak for mf in self.mfs]
        if any(b < a for a, b in zip(peaks, peaks[1:])):
            raise ValueError("output MF peaks must be non-decreasing")

    @cached_property
    def sampled(self) -> np.ndarray:
        """(5, GRID_POINTS) membership samples on the defuzzification grid."""
        return np.stack([membership(mf, OUTPUT_GRID) for mf in self.mfs])


OUTPUT_GRID = np.linspace(0.0, 1.0, GRID_POINTS)


def _trapezoid_weights(n):
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


_GRID_WEIGHTS = _trapezoid_weights(GRID_POINTS)


@dataclass(frozen=True)
class RuleTable:
    """Consequent indices (1-based into the output partition), row-major grid."""

    consequents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        widths = {len(row) for row in self.consequents}
        if len(widths) != 1:
            raise ValueError("rule table rows have different lengths")
        for i, row in enumerate(self.consequents):
            for j, k in enumerate(row):
                if not (isinstance(k, (int, np.integer)) and 1 <= k <= N_OUTPUT_MFS):
                    raise ValueError(f"rule ({i + 1}, {j + 1}) has invalid consequent {k!r}")

    @classmethod
    def from_flat(cls, values, rows, cols):
        values = [int(v) for v in values]
        if len(values) != rows * cols:
            raise ValueError(f"expected {rows * cols} consequents, got {len(values)}")
        return cls(tuple(tuple(values[r * cols:(r + 1) * cols]) for r in range(rows)))

    @property
    def shape(self):
        return len(self.consequents), len(self.consequents[0])

    def as_array(self) -> np.ndarray:
        return np.array(self.consequents, dtype=int)


def centroid(aggregate, grid=None) -> float:
    """Center of mass of a sampled set (trapezoid rule on a uniform grid); 0.5 when empty."""
    mu = np.asarray(aggregate, dtype=float)
    if grid is None:
        xs, w = OUTPUT_GRID, _GRID_WEIGHTS
    else:
        xs = np.asarray(grid, dtype=float)
        w = _trapezoid_weights(xs.shape[-1])
    total = (mu * w).sum(axis=-1)
    moment = (mu * (w * xs)).sum(axis=-1)
    safe = np.where(total > 0, total, 1.0)
    out = np.where(total > 0, moment / safe, EMPTY_CENTROID)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Fis:
    input1: InputPartition
    input2: InputPartition
    output: OutputPartition
    rules: RuleTable

    def __post_init__(self):
        if self.rules.shape != (len(self.input1), len(self.input2)):
            raise ValueError(
                f"rule table is {self.rules.shape}, inputs need "
                f"{(len(self.input1), len(self.input2))}"
            )

    def firing_strengths(self, x1, x2) -> np.ndarray:
        mu1 = self.input1.fuzzify(x1)
        mu2 = self.input2.fuzzify(x2)
        return np.minimum(mu1[..., :, None], mu2[..., None, :])

    def infer(self, x1, x2):
        """Crisp likelihood in [0, 1]; broadcasts over array inputs."""
        w = self.firing_strengths(x1, x2)
        w = w.reshape(w.shape[:-2] + (-1,))
        cons = self.rules.as_array().ravel() - 1
        # clipping each rule then taking the max equals clipping each output
        # MF at the strongest rule pointing to it
        per_output = np.zeros(w.shape[:-1] + (N_OUTPUT_MFS,))
        for k in range(N_OUTPUT_MFS):
            sel = cons == k
            if sel.any():
                per_output[..., k] = w[..., sel].max(axis=-1)
        clipped = np.minimum(per_output[..., :, None], self.output.sampled)
        return centroid(clipped.max(axis=-2))

    def table(self, lo1: int, hi1: int, lo2: int, hi2: int) -> np.ndarray:
        """Outputs for every integer pair in [lo1, hi1] x [lo2, hi2]."""
        a = np.arange(lo1, hi1 + 1, dtype=float)
        b = np.arange(lo2, hi2 + 1, dtype=float)
        return np.asarray(self.infer(a[:, None], b[None, :]))


def infer(fis: Fis, x1, x2):
    return fis.infer(x1, x2)


class _IntLookup:
    """Precomputed FIS outputs for integer inputs, clamped at the table edges."""

    def __init__(self, fis: Fis):
        self.lo1 = int(np.floor(fis.input1.domain_min))
        self.hi1 = int(np.ceil(fis.input1.domain_max))
        self.lo2 = int(np.floor(fis.input2.domain_min))
        self.hi2 = int(np.ceil(fis.input2.domain_max))
        self.values = fis.table(self.lo1, self.hi1, self.lo2, self.hi2)

    def __call__(self, x1, x2):
        # np.clip is slow on tiny arrays
        i = np.minimum(np.maximum(np.asarray(x1, dtype=int) - self.lo1, 0), self.hi1 - self.lo1)
        j = np.minimum(np.maximum(np.asarray(x2, dtype=int) - self.lo2, 0), self.hi2 - self.lo2)
        return self.values[i, j]


@dataclass(frozen=True)
class FisPair:
    """FIS1 (weekly hours) and FIS2 (daily hours) sharing one output partition."""

    fis1: Fis
    fis2: Fis
    _lookups: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.fis1.output != self.fis2.output:
            raise ValueError("FIS1 and FIS2 must share the output partition")

    @property
    def output(self) -> OutputPartition:
        return self.fis1.output

    def weekly_likelihood(self, preferred_weekly, assigned_weekly):
        """FIS1 on integer hour counts (table lookup)."""
        if "fis1" not in self._lookups:
            self._lookups["fis1"] = _IntLookup(self.fis1)
        return self._lookups["fis1"](preferred_weekly, assigned_weekly)

    def daily_likelihood(self, preferred_shift, assigned_daily):
        """FIS2 on integer hour counts (table lookup)."""
        if "fis2" not in self._lookups:
            self._lookups["fis2"] = _IntLookup(self.fis2)
        return self._lookups["fis2"](preferred_shift, assigned_daily)


def make_fis_pair(fis1_rules, fis2_rules, output: OutputPartition,
                  fis1_inputs=None, fis2_inputs=None) -> FisPair:
    in1 = fis1_inputs or default_fis1_inputs()
    in2 = fis2_inputs or default_fis2_inputs()
    if not isinstance(fis1_rules, RuleTable):
        fis1_rules = RuleTable(tuple(tuple(int(v) for v in row) for row in fis1_rules))
    if not isinstance(fis2_rules, RuleTable):
        fis2_rules = RuleTable(tuple(tuple(int(v) for v in row) for row in fis2_rules))
    return FisPair(Fis(in1[0], in1[1], output, fis1_rules), Fis(in2[0], in2[1], output, fis2_rules))
