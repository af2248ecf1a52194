"""Rank and product-moment correlation coefficients, written out longhand.

Pearson is the product-moment coefficient; Spearman is Pearson on mid-ranks
(average ranks over ties); Kendall is the tie-corrected tau-b. The test suite
pins these against an independent statistics package.
"""

from __future__ import annotations

import math
from typing import Sequence


class UndefinedCorrelation(ValueError):
    """The coefficient is undefined for this input (e.g. a constant sequence)."""


def _check(x: Sequence[float], y: Sequence[float]) -> None:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise ValueError("need at least 3 paired observations")


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    _check(x, y)
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("pearson r undefined for constant input")
    return sxy / math.sqrt(sxx * syy)


def midranks(values: Sequence[float]) -> list[float]:
    """Average ranks (1-based); tied values share the mean of their rank span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    _check(x, y)
    try:
        return pearson_r(midranks(x), midranks(y))
    except UndefinedCorrelation as err:
        raise UndefinedCorrelation("spearman rho undefined for constant input") from err


def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> float:
    _check(x, y)
    n = len(x)
    concordant = discordant = 0
    ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2

    def _tie_pairs(values: Sequence[float]) -> int:
        counts: dict[float, int] = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        return sum(c * (c - 1) // 2 for c in counts.values())

    n1 = _tie_pairs(x)
    n2 = _tie_pairs(y)
    denom = (n0 - n1) * (n0 - n2)
    if denom <= 0:
        raise UndefinedCorrelation("kendall tau-b undefined for constant input")
    return (concordant - discordant) / math.sqrt(denom)


def correlate(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """(pearson r, spearman rho, kendall tau-b) over paired ratings."""
    return pearson_r(x, y), spearman_rho(x, y), kendall_tau_b(x, y)
