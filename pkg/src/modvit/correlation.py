"""Kendall tau-b between two score vectors (Knight's merge-sort method)."""

from __future__ import annotations

import math

import numpy as np


def _tie_pairs(sorted_values) -> int:
    """Number of tied pairs in an already sorted sequence."""
    total, run = 0, 1
    for a, b in zip(sorted_values, sorted_values[1:]):
        if a == b:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


def _count_swaps(values: list) -> int:
    """Sort ``values`` in place with a bottom-up merge sort; return inversions."""
    n = len(values)
    buf = values[:]
    swaps = 0
    width = 1
    src, dst = values, buf
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if src[j] < src[i]:
                    dst[k] = src[j]
                    swaps += mid - i
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            dst[k:k + mid - i] = src[i:mid]
            k += mid - i
            dst[k:k + hi - j] = src[j:hi]
        src, dst = dst, src
        width *= 2
    if src is not values:
        values[:] = src
    return swaps


def kendall_tau(a, b) -> float:
    """Tau-b rank correlation with tie correction, O(n log n).

    Accepts arrays or :class:`~modvit.centrality.ScoreVector` objects.
    A score vector is compared through its attack ranking, so methods that
    attack the lowest scores first (MV) enter negated. ``nan`` entries
    (absent nodes) are dropped pairwise. Returns ``nan`` when either side
    is constant.
    """
    a = np.asarray(getattr(a, "priority", a), dtype=np.float64)
    b = np.asarray(getattr(b, "priority", b), dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("score vectors cover different node sets")
    keep = ~(np.isnan(a) | np.isnan(b))
    a, b = a[keep], b[keep]
    n = len(a)
    if n < 2:
        raise ValueError("kendall tau needs at least two nodes")
    order = np.lexsort((b, a))
    a, b = a[order].tolist(), b[order].tolist()
    n0 = n * (n - 1) // 2
    ties_a = _tie_pairs(a)
    joint, run = 0, 1
    for t in range(1, n):
        if a[t] == a[t - 1] and b[t] == b[t - 1]:
            run += 1
        else:
            joint += run * (run - 1) // 2
            run = 1
    joint += run * (run - 1) // 2
    swaps = _count_swaps(b)
    ties_b = _tie_pairs(b)
    denom = math.sqrt((n0 - ties_a) * (n0 - ties_b))
    if denom == 0:
        return float("nan")
    return (n0 - ties_a - ties_b + joint - 2 * swaps) / denom


def tau_matrix(vectors: dict) -> tuple[list, np.ndarray]:
    """Pairwise tau-b over a ``{name: scores or ScoreVector}`` mapping."""
    names = list(vectors)
    out = np.eye(len(names))
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            out[i, j] = out[j, i] = kendall_tau(vectors[names[i]], vectors[names[j]])
    return names, out
