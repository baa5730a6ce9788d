"""Detection of observations that cancel out of the covariance entirely.

A data point is *nonextant* when the estimator's output does not depend
on its value, i.e. its linear coefficient is zero.  Three independent
detectors are provided and cross-checked in the test suite:

* interval rule: a point is cancelled when the union of its two adjacent
  intervals fits inside a single opposite-leg interval; for the second
  and penultimate point of a leg, where that containment test can fail
  for pure edge reasons, the fallback is the exactly-one-overlap
  condition,
* label rule: the same decisions computed purely from the merged A/B
  label sequence (containment = being the middle of a same-label triple),
* coefficient oracle: direct zero test of the analytic coefficients.

The first and last point of a leg always survive.  Detections are
classified by which condition fired: ``f_interior`` counts containment
(triple-middle) detections, ``f_total`` additionally counts the
edge-fallback detections, which enter the index sets only when
``include_boundary`` is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LabelSequence, ObservationSeries
from .errors import EmptyPattern, IndexOutOfRange, ZeroOverlaps
from .estimator import point_coefficients

ORACLE_RELATIVE_TOLERANCE = 1e-12

_METHODS = ("interval_rule", "label_rule", "oracle")


@dataclass(frozen=True)
class NonextantReport:
    """Nonextant point indices per leg plus the derived loss numbers."""

    nonextant_1: tuple[int, ...]
    nonextant_2: tuple[int, ...]
    f_interior: int
    f_total: int
    m: int
    loss_interior: float
    loss_total: float
    method: str

    def same_points(self, other: "NonextantReport") -> bool:
        """True when both reports name identical index sets and counts."""
        return (
            self.nonextant_1 == other.nonextant_1
            and self.nonextant_2 == other.nonextant_2
            and self.f_interior == other.f_interior
            and self.f_total == other.f_total
            and self.m == other.m
        )


@dataclass(frozen=True)
class OpenInterval:
    """Open interval ``(lo, hi)``; empty unless lo < hi."""

    lo: float
    hi: float

    @property
    def is_empty(self) -> bool:
        return not self.lo < self.hi

    def __contains__(self, x: float) -> bool:
        return self.lo < x < self.hi

    @classmethod
    def empty(cls) -> "OpenInterval":
        return cls(math.inf, -math.inf)


def _build_report(
    leg1: tuple[list[int], list[int]],
    leg2: tuple[list[int], list[int]],
    m: int,
    method: str,
    include_boundary: bool,
) -> NonextantReport:
    assert method in _METHODS
    set1 = sorted(set(leg1[0]) | (set(leg1[1]) if include_boundary else set()))
    set2 = sorted(set(leg2[0]) | (set(leg2[1]) if include_boundary else set()))
    f_interior = len(leg1[0]) + len(leg2[0])
    f_total = len(set1) + len(set2)
    loss_interior = f_interior / m if m > 0 else math.nan
    loss_total = f_total / m if m > 0 else math.nan
    return NonextantReport(
        nonextant_1=tuple(set1),
        nonextant_2=tuple(set2),
        f_interior=f_interior,
        f_total=f_total,
        m=m,
        loss_interior=loss_interior,
        loss_total=loss_total,
        method=method,
    )


def overlap_count(s1: ObservationSeries, s2: ObservationSeries) -> int:
    """Number of overlapping interval pairs, without materialising them."""
    t1, t2 = s1.times, s2.times
    m1 = t1.size - 1
    lo = np.maximum(1, np.searchsorted(t1, t2[:-1], side="right"))
    hi = np.minimum(m1, np.searchsorted(t1, t2[1:], side="left"))
    return int(np.maximum(hi - lo + 1, 0).sum())


def _contained_mask(t_self: np.ndarray, t_opp: np.ndarray) -> np.ndarray:
    """Containment test for every candidate index 1..M-1 of ``t_self``.

    ``mask[j - 1]`` is True when ``(t_self[j-1], t_self[j+1]]`` lies
    inside a single opposite interval.  Strict endpoint comparisons make
    this exact for the half-open convention even with shared timestamps.
    """
    m_opp = t_opp.size - 1
    left = t_self[:-2]
    right = t_self[2:]
    fit_hi = np.searchsorted(t_opp, left, side="right")   # opposite i <= fit_hi
    fit_lo = np.searchsorted(t_opp, right, side="left")   # opposite i >= fit_lo
    return np.minimum(m_opp, fit_hi) >= np.maximum(1, fit_lo)


def _interval_rule_side(t_self: np.ndarray, t_opp: np.ndarray) -> tuple[list[int], list[int]]:
    """Nonextant indices of the ``t_self`` leg: (containment, edge-fallback)."""
    m_self = t_self.size - 1
    m_opp = t_opp.size - 1

    contained = _contained_mask(t_self, t_opp)
    interior = (np.flatnonzero(contained) + 1).tolist()

    boundary: list[int] = []
    for j in {1, m_self - 1}:
        if not 1 <= j <= m_self - 1 or contained[j - 1]:
            continue
        alpha = int(np.searchsorted(t_opp, t_self[j - 1], side="right"))
        beta = int(np.searchsorted(t_opp, t_self[j + 1], side="left"))
        touched = min(m_opp, beta) - max(1, alpha) + 1
        if touched == 1:
            boundary.append(j)
    return interior, sorted(boundary)


def detect_interval_rule(
    s1: ObservationSeries,
    s2: ObservationSeries,
    include_boundary: bool = False,
) -> NonextantReport:
    """Detect nonextant points of both legs by interval containment.

    A point is nonextant when the union of its two adjacent intervals
    lies inside a single opposite-leg interval.  With
    ``include_boundary`` the second and penultimate points that fail
    containment are additionally tested with the exactly-one-overlap
    fallback, and those extra detections enter the index sets.
    """
    leg1 = _interval_rule_side(s1.times, s2.times)
    leg2 = _interval_rule_side(s2.times, s1.times)
    m = overlap_count(s1, s2)
    return _build_report(leg1, leg2, m, "interval_rule", include_boundary)


def _label_positions(labels: LabelSequence) -> dict[str, np.ndarray]:
    return {lab: np.flatnonzero(labels.labels == lab) for lab in ("A", "B")}


def _label_rule_side(
    pos_self: np.ndarray,
    opp_before: np.ndarray,
    m_opp: int,
) -> tuple[list[int], list[int]]:
    """Label-sequence version of the interval rule for one leg.

    ``opp_before[p]`` counts opposite-label entries before merged
    position ``p``; with tie-free inputs every endpoint comparison in the
    interval rule reduces to such a count.
    """
    m_self = pos_self.size - 1

    # middle of a same-label triple: own neighbours are adjacent in the merge
    middle = pos_self[2:] - pos_self[:-2] == 2
    interior = (np.flatnonzero(middle) + 1).tolist()

    boundary: list[int] = []
    for j in {1, m_self - 1}:
        if not 1 <= j <= m_self - 1 or middle[j - 1]:
            continue
        alpha = int(opp_before[pos_self[j - 1]])
        beta = int(opp_before[pos_self[j + 1]])
        touched = min(m_opp, beta) - max(1, alpha) + 1
        if touched == 1:
            boundary.append(j)
    return interior, sorted(boundary)


def detect_label_rule(
    labels: LabelSequence,
    include_boundary: bool = False,
) -> NonextantReport:
    """Detect nonextant points from the merged label sequence alone.

    A point is nonextant exactly when its merged-sequence neighbours
    carry its own label (middle of a same-label triple); second and
    penultimate points that are not middles fall back to the
    exactly-one-overlap test, evaluated on merge positions.  Runs in
    O(n).
    """
    pos = _label_positions(labels)
    is_a = labels.labels == "A"
    before_a = np.concatenate([[0], np.cumsum(is_a)])
    before_b = np.concatenate([[0], np.cumsum(~is_a)])
    m_a = pos["A"].size - 1
    m_b = pos["B"].size - 1

    leg1 = _label_rule_side(pos["A"], before_b, m_b)
    leg2 = _label_rule_side(pos["B"], before_a, m_a)

    # overlap count from prefix sums: opposite intervals touched per own interval
    alpha = before_a[pos["B"][:-1]]
    beta = before_a[pos["B"][1:]]
    m = int(np.maximum(np.minimum(m_a, beta) - np.maximum(1, alpha) + 1, 0).sum())
    return _build_report(leg1, leg2, m, "label_rule", include_boundary)


def count_pattern(labels: LabelSequence | str, pattern: str) -> int:
    """Count (overlapping) occurrences of ``pattern`` in the label string.

    Linear-time failure-function matcher.
    """
    if len(pattern) == 0:
        raise EmptyPattern("pattern must contain at least one label")
    text = labels.as_string if isinstance(labels, LabelSequence) else labels
    n, p = len(text), len(pattern)
    if n < p:
        return 0

    fail = [0] * p
    k = 0
    for q in range(1, p):
        while k > 0 and pattern[q] != pattern[k]:
            k = fail[k - 1]
        if pattern[q] == pattern[k]:
            k += 1
        fail[q] = k

    count = 0
    k = 0
    for ch in text:
        while k > 0 and ch != pattern[k]:
            k = fail[k - 1]
        if ch == pattern[k]:
            k += 1
        if k == p:
            count += 1
            k = fail[k - 1]
    return count


def oracle_detect(
    s1: ObservationSeries,
    s2: ObservationSeries,
    include_boundary: bool = True,
) -> NonextantReport:
    """Arbiter detector: report points whose coefficient is (near) zero.

    The coefficients are computed analytically, so only representation
    error remains; a point is flagged when its coefficient is at most
    ``1e-12`` relative to the median absolute opposite-leg increment.
    Detections are classified with the same containment test the other
    detectors use, so reports compare field for field.  Meaningful as
    ground truth only when values are continuously distributed (zero
    increments would mask genuinely extant points).
    """
    sides = []
    for series, opposite in ((s1, s2), (s2, s1)):
        coeff = point_coefficients(series, opposite)
        scale = float(np.median(np.abs(opposite.increments)))
        tol = ORACLE_RELATIVE_TOLERANCE * scale
        detected = np.flatnonzero(np.abs(coeff) <= tol).tolist()
        contained = _contained_mask(series.times, opposite.times)
        last = series.n_points - 1
        interior = [k for k in detected if 1 <= k <= last - 1 and contained[k - 1]]
        boundary = [k for k in detected if k not in interior]
        sides.append((interior, boundary))
    m = overlap_count(s1, s2)
    return _build_report(sides[0], sides[1], m, "oracle", include_boundary)


def nonextant_interval(
    s1: ObservationSeries,
    s2: ObservationSeries,
    i: int,
) -> OpenInterval:
    """Open time window of leg-2 points cancelled against leg-1 interval ``i``.

    For interior ``i`` the window runs from the first leg-2 time after
    ``t1[i-1]`` to the last leg-2 time before ``t1[i]``; at ``i = 1`` the
    left end widens to the earlier of the leg-2 neighbours of ``t1[0]``,
    and symmetrically on the right at ``i = M``.  Strictly interior leg-2
    points of the window are nonextant.
    """
    m1 = s1.n_intervals
    if not 1 <= i <= m1:
        raise IndexOutOfRange(f"interval index {i} outside 1..{m1}")
    t1, t2 = s1.times, s2.times

    def first_after(x: float) -> float | None:
        k = int(np.searchsorted(t2, x, side="right"))
        return float(t2[k]) if k < t2.size else None

    def last_before(x: float) -> float | None:
        k = int(np.searchsorted(t2, x, side="left"))
        return float(t2[k - 1]) if k >= 1 else None

    if i == 1:
        candidates = [v for v in (last_before(t1[0]), first_after(t1[0])) if v is not None]
        lo = min(candidates) if candidates else None
    else:
        lo = first_after(t1[i - 1])
    if i == m1:
        candidates = [v for v in (last_before(t1[m1]), first_after(t1[m1])) if v is not None]
        hi = max(candidates) if candidates else None
    else:
        hi = last_before(t1[i])

    if lo is None or hi is None:
        return OpenInterval.empty()
    return OpenInterval(lo, hi)


def data_loss_ratio(report: NonextantReport) -> float:
    """Nonextant count over overlap count, per the report's boundary mode."""
    if report.m <= 0:
        raise ZeroOverlaps("no overlapping intervals, the ratio f/m is undefined")
    return report.f_total / report.m
