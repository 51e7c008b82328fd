"""Scoring partitions against a reference pattern and summarizing the scores."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .relation import Partition

__all__ = [
    "EfficiencyScore",
    "Statistics",
    "EfficiencyReport",
    "contingency",
    "match_partitions",
    "summarize",
    "bucket_distribution",
    "efficiency_report",
]

LEVELS = "levels"
BANDS = "bands"


@dataclass(frozen=True)
class EfficiencyScore:
    """``matched`` of ``total`` variables placed consistently with the reference."""

    matched: int
    total: int

    def __post_init__(self):
        if not 0 <= self.matched <= self.total or self.total < 1:
            raise ValueError(f"invalid score {self.matched}/{self.total}")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.matched, self.total)

    @property
    def percentage(self) -> float:
        return 100.0 * self.matched / self.total

    def __str__(self) -> str:
        return f"{self.matched}/{self.total}"


def contingency(a: Partition, b: Partition) -> np.ndarray:
    table = np.zeros((a.k, b.k), dtype=int)
    np.add.at(table, (np.array(a.labels), np.array(b.labels)), 1)
    return table


def match_partitions(candidate: Partition, reference: Partition) -> EfficiencyScore:
    """Best agreement over one-to-one matchings of candidate and reference clusters.

    The matching is a maximum-weight assignment on the contingency table;
    clusters left unmatched (when the cluster counts differ) score nothing.
    """
    if candidate.order != reference.order:
        raise ValueError(
            f"partitions cover different numbers of variables: {candidate.order} vs {reference.order}"
        )
    table = contingency(candidate, reference)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return EfficiencyScore(int(table[rows, cols].sum()), candidate.order)


@dataclass(frozen=True)
class Statistics:
    average: float
    median: EfficiencyScore
    mode: EfficiencyScore
    minimum: EfficiencyScore
    maximum: EfficiencyScore
    count: int

    def as_rows(self) -> list[tuple[str, str]]:
        return [
            ("Average efficiency", f"{self.average:.1f}%"),
            ("Median", str(self.median)),
            ("Mode", str(self.mode)),
            ("Minimal efficiency", str(self.minimum)),
            ("Maximal efficiency", str(self.maximum)),
        ]


def summarize(scores) -> Statistics:
    """Average (percent), lower median, smallest mode, minimum and maximum of the scores."""
    scores = list(scores)
    if not scores:
        raise ValueError("cannot summarize an empty list of scores")
    ordered = sorted(scores, key=lambda s: (s.fraction, s.total))
    counts = Counter(s.fraction for s in scores)
    top = max(counts.values())
    mode_value = min(f for f, n in counts.items() if n == top)
    mode = next(s for s in ordered if s.fraction == mode_value)
    return Statistics(
        average=float(np.mean([s.percentage for s in scores])),
        median=ordered[(len(ordered) - 1) // 2],
        mode=mode,
        minimum=ordered[0],
        maximum=ordered[-1],
        count=len(scores),
    )


def _level_buckets(total: int, levels: int) -> list[tuple[str, callable]]:
    out = []
    for d in range(levels):
        m = total - d
        out.append((f"{m}/{total}", lambda s, m=m: s.matched == m))
    floor = total - levels
    out.append((f"<={floor}/{total}", lambda s, f=floor: s.matched <= f))
    return out


def _band_buckets(edges=(90, 80, 70)) -> list[tuple[str, callable]]:
    out = []
    upper = 100
    for lo in edges:
        out.append((f"({lo}%,{upper}%]", lambda s, lo=lo, hi=upper: lo < s.percentage <= hi))
        upper = lo
    out.append((f"<={upper}%", lambda s, hi=upper: s.percentage <= hi))
    return out


def bucket_distribution(scores, scheme: str = LEVELS, levels: int = 3) -> dict[str, float]:
    """Percentage of scores falling in each bucket.

    ``"levels"`` gives the exact top ``levels`` outcomes (``9/9``, ``8/9``,
    ``7/9``) plus a floor bucket; ``"bands"`` gives ten-point percentage
    bands above 70% plus a floor band.
    """
    scores = list(scores)
    if scheme == LEVELS:
        if not scores:
            return {}
        totals = {s.total for s in scores}
        if len(totals) != 1:
            raise ValueError("exact-level buckets need scores over a common total")
        buckets = _level_buckets(totals.pop(), levels)
    elif scheme == BANDS:
        buckets = _band_buckets()
    else:
        raise ValueError(f"unknown bucket scheme {scheme!r}")
    out = {}
    for label, test in buckets:
        hits = sum(1 for s in scores if test(s))
        out[label] = 100.0 * hits / len(scores) if scores else 0.0
    return out


@dataclass(frozen=True)
class EfficiencyReport:
    variant_code: str
    scores: tuple[EfficiencyScore, ...]
    statistics: Statistics
    distribution: dict = field(default_factory=dict)
    scheme: str = LEVELS


def efficiency_report(variant_code: str, scores, scheme: str | None = None) -> EfficiencyReport:
    """Bundle statistics and distribution; exact levels for up to ten variables, bands beyond."""
    scores = tuple(scores)
    if scheme is None:
        scheme = LEVELS if max(s.total for s in scores) <= 10 else BANDS
    return EfficiencyReport(
        variant_code, scores, summarize(scores), bucket_distribution(scores, scheme), scheme
    )
