"""Brute-force reference implementations, deliberately independent of the package."""

import math

import numpy as np

ORACLE_POINTS = 100001


def tri(left, peak, right, x):
    x = np.asarray(x, dtype=float)
    up = (x - left) / (peak - left) if peak > left else (x >= peak).astype(float)
    down = (right - x) / (right - peak) if right > peak else (x <= peak).astype(float)
    return np.clip(np.minimum(up, down), 0.0, 1.0)


def mamdani(rules, mfs1, mfs2, dom1, dom2, out_mfs, x1, x2, n=ORACLE_POINTS):
    """Rule-by-rule Mamdani: clip each consequent, max-combine, trapezoidal centroid.

    ``rules[i][j]`` is a 1-based index into ``out_mfs``; MFs are (l, p, r) tuples.
    """
    x1 = min(max(x1, dom1[0]), dom1[1])
    x2 = min(max(x2, dom2[0]), dom2[1])
    ys = np.linspace(0.0, 1.0, n)
    out_samples = [tri(*mf, ys) for mf in out_mfs]
    agg = np.zeros(n)
    for i, mf1 in enumerate(mfs1):
        for j, mf2 in enumerate(mfs2):
            w = min(float(tri(*mf1, x1)), float(tri(*mf2, x2)))
            if w > 0:
                agg = np.maximum(agg, np.minimum(w, out_samples[rules[i][j] - 1]))
    area = np.trapezoid(agg, ys)
    if area == 0:
        return 0.5
    return float(np.trapezoid(ys * agg, ys) / area)


def fis_oracle(fis, x1, x2, n=ORACLE_POINTS):
    """Apply :func:`mamdani` to a package ``Fis`` by copying out plain numbers."""
    as_tuples = lambda mfs: [(m.left, m.peak, m.right) for m in mfs]
    return mamdani(
        [list(r) for r in fis.rules.consequents],
        as_tuples(fis.input1.mfs),
        as_tuples(fis.input2.mfs),
        (fis.input1.domain_min, fis.input1.domain_max),
        (fis.input2.domain_min, fis.input2.domain_max),
        as_tuples(fis.output.mfs),
        x1,
        x2,
        n,
    )


def rms_loop(values):
    total = 0.0
    count = 0
    for v in values:
        total += v * v
        count += 1
    if count == 0:
        return 0.0
    return math.sqrt(total / count)
