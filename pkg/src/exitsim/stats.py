"""Paired statistical tests used to compare forecast error distributions:
the Wilcoxon signed-rank test and the Vargha-Delaney A12 effect size.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AllTiesError, DataError

EXACT_LIMIT = 25


def _signed_ranks(diffs):
    """Average ranks of |d| with the sign of d; zero differences dropped."""
    diffs = np.asarray(diffs, dtype=float)
    diffs = diffs[diffs != 0]
    if len(diffs) == 0:
        raise AllTiesError("all paired differences are zero")
    abs_d = np.abs(diffs)
    order = np.argsort(abs_d, kind="stable")
    ranks = np.empty(len(diffs))
    sorted_abs = abs_d[order]
    i = 0
    while i < len(diffs):
        j = i
        while j + 1 < len(diffs) and sorted_abs[j + 1] == sorted_abs[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return diffs, ranks, bool(len(np.unique(abs_d)) < len(abs_d))


def _exact_sf_table(n):
    """counts[s] = number of sign assignments with positive-rank sum s,
    for untied integer ranks 1..n."""
    max_sum = n * (n + 1) // 2
    counts = np.zeros(max_sum + 1, dtype=float)
    counts[0] = 1.0
    for r in range(1, n + 1):
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:-r] if r > 0 else counts
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(a, b) -> float:
    """Two-sided p-value of the Wilcoxon signed-rank test on paired samples.

    Exact null distribution for n <= 25 without ties; normal approximation
    with continuity and tie corrections otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DataError("paired samples must have equal length")
    diffs, ranks, has_ties = _signed_ranks(a - b)
    n = len(diffs)
    if n < 6:
        raise DataError(f"need at least 6 non-tied pairs, got {n}")

    w_plus = float(ranks[diffs > 0].sum())
    if not has_ties and n <= EXACT_LIMIT:
        counts = _exact_sf_table(n)
        total = counts.sum()
        w = min(w_plus, n * (n + 1) / 2 - w_plus)
        p = 2.0 * counts[: int(w) + 1].sum() / total
        return min(1.0, p)

    mean = n * (n + 1) / 4.0
    tie_term = 0.0
    _, tie_counts = np.unique(np.abs(diffs), return_counts=True)
    for t in tie_counts:
        tie_term += t**3 - t
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0
    z = (abs(w_plus - mean) - 0.5) / math.sqrt(var)
    return float(math.erfc(z / math.sqrt(2.0)))


def vargha_delaney_a12(sample_a, sample_b) -> float:
    """Probability that a random draw from A exceeds one from B, ties half."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise DataError("both samples must be nonempty")
    greater = (a[:, None] > b[None, :]).sum()
    ties = (a[:, None] == b[None, :]).sum()
    return float((greater + 0.5 * ties) / (len(a) * len(b)))
