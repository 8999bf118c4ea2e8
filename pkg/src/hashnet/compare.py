"""Agreement between similarity series computed under different memory policies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

LOW_R = 0.5


class AlignmentError(ValueError):
    pass


@dataclass
class MethodComparison:
    policies: tuple
    pair: tuple
    points: list  # (date, value_a, value_b)
    pearson_r: float | None
    reason: str = ""

    @property
    def n_points(self) -> int:
        return len(self.points)


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Sample Pearson correlation; ``None`` if either side has zero variance."""
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0 or syy == 0:
        return None
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def align_and_correlate(series_a: Mapping, series_b: Mapping, policies=("", ""),
                        pair=("", "")) -> MethodComparison:
    """Inner-join two ``{date: value}`` series and correlate the matched values."""
    common = sorted(set(series_a) & set(series_b))
    if len(common) < 2:
        raise AlignmentError(f"only {len(common)} common dates")
    pts = [(d, series_a[d], series_b[d]) for d in common]
    r = pearson([p[1] for p in pts], [p[2] for p in pts])
    reason = "" if r is not None else "zero variance"
    return MethodComparison(tuple(policies), tuple(pair), pts, r, reason)


@dataclass
class CorrelationMatrix:
    labels: list
    policies: tuple
    cells: dict = field(default_factory=dict)  # frozenset-style key (a, b) sorted -> r or None
    low_threshold: float = LOW_R

    def get(self, a: str, b: str):
        return self.cells.get(tuple(sorted((a, b))))

    def low_cells(self) -> list:
        return sorted(k for k, r in self.cells.items() if r is not None and r < self.low_threshold)

    def grid(self) -> list[list]:
        return [[self.get(a, b) for b in self.labels] for a in self.labels]


def correlation_matrix(series: Mapping[tuple, Mapping[str, Mapping]], policy_pair: tuple,
                       labels: Sequence[str] | None = None,
                       low_threshold: float = LOW_R) -> CorrelationMatrix:
    """Pearson r between two policies for every group pair.

    ``series`` maps a group pair ``(a, b)`` to ``{policy: {date: value}}``.  A
    pair missing a policy, or with too few common dates, gets an absent cell.
    """
    pa, pb = policy_pair
    if labels is None:
        labels = sorted({g for pair in series for g in pair})
    mat = CorrelationMatrix(list(labels), (pa, pb), low_threshold=low_threshold)
    for pair, by_policy in sorted(series.items()):
        key = tuple(sorted(pair))
        if pa not in by_policy or pb not in by_policy:
            mat.cells[key] = None
            continue
        try:
            mat.cells[key] = align_and_correlate(by_policy[pa], by_policy[pb], (pa, pb), pair).pearson_r
        except AlignmentError:
            mat.cells[key] = None
    return mat
