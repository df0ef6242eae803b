"""Slide-rule relation search between the M column and the G/D columns.

A relation reads a G or D group count as the sum of a consecutive run of
M-column group counts plus a small integer correction.
"""

import logging
from collections import Counter
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from ishango.artifact import DEFAULT_PITCH_MM, layout as build_layout
from ishango.errors import RelationError
from ishango.models import Artifact, CountProfile, Layout

TARGET_COLUMNS: Tuple[str, ...] = ("G", "D")
OPERAND_COLUMN = "M"
ALIGNMENT_DIGITS = 9

logger = logging.getLogger(__name__)


class SearchConfig(BaseModel):
    """Bounds and weights of the relation search."""

    model_config = ConfigDict(frozen=True)

    max_run: int = Field(default=3, ge=1, description="Longest operand run")
    max_correction_abs: int = Field(
        default=2, ge=0, description="Largest allowed |correction|"
    )
    min_alignment: float = Field(
        default=0.0,
        ge=0.0,
        le=1.0,
        description="Minimum overlap fraction; overlap must also be non-empty",
    )
    correction_weight: float = Field(
        default=2.0, ge=0.0, description="Cost of one unit of correction"
    )
    pitch_mm: float = Field(
        default=DEFAULT_PITCH_MM, gt=0, description="Pitch used for the layout"
    )


class Relation(BaseModel):
    """target = sum(operands) + correction."""

    model_config = ConfigDict(frozen=True)

    target: str = Field(description="G or D group label")
    operands: Tuple[str, ...] = Field(
        min_length=1, description="Consecutive M-column group labels"
    )
    correction: int = Field(default=0, description="Added to the operand sum")
    cost: float = Field(default=0.0, ge=0.0, description="Simplicity cost")
    alignment: float = Field(
        default=1.0, ge=0.0, le=1.0, description="Vertical overlap fraction"
    )
    target_count: Optional[int] = Field(default=None, description="Target count")
    operand_counts: Tuple[int, ...] = Field(
        default_factory=tuple, description="Operand counts, in M order"
    )

    @property
    def run_length(self) -> int:
        """Number of operands."""
        return len(self.operands)

    def describe(self) -> str:
        """Human-readable form such as ``4 + 8 + 10 -1 ==> 21 (Db)``."""
        terms = " + ".join(str(c) for c in self.operand_counts) or "+".join(
            self.operands
        )
        if self.correction > 0:
            terms += f" +{self.correction}"
        elif self.correction < 0:
            terms += f" -{-self.correction}"
        total = self.target_count if self.target_count is not None else "?"
        return f"{terms} ==> {total} ({self.target})"


class TallySummary(BaseModel):
    """Per-M-group aggregate of a covering set of relations."""

    model_config = ConfigDict(frozen=True)

    slots: Dict[str, int] = Field(description="M group label to aggregate")
    corrections_by_value: Dict[int, int] = Field(
        description="Correction value to the sum of its occurrences"
    )
    corrections_total: int = Field(description="Sum of all corrections")
    multiples_of_12: Tuple[str, ...] = Field(
        description="M groups whose aggregate is a positive multiple of 12"
    )

    @property
    def aggregates(self) -> List[int]:
        """Slot values in M order."""
        return list(self.slots.values())


CountSource = Union[Artifact, CountProfile]


def _profile(a: CountSource) -> CountProfile:
    return a.counts() if isinstance(a, Artifact) else a


def _count(profile: CountProfile, label: str) -> int:
    try:
        return profile.count_of(label)
    except KeyError:
        raise RelationError(f"unknown group label {label!r}") from None


def relation_cost(r: Relation, cfg: Optional[SearchConfig] = None) -> float:
    """(run length - 1) + correction_weight * |correction|."""
    cfg = cfg or SearchConfig()
    return (r.run_length - 1) + cfg.correction_weight * abs(r.correction)


def _overlap(
    interval: Tuple[float, float], others: Iterable[Tuple[float, float]]
) -> float:
    top, bottom = interval
    merged: List[List[float]] = []
    for lo, hi in sorted(others):
        lo, hi = max(lo, top), min(hi, bottom)
        if hi <= lo:
            continue
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return sum(hi - lo for lo, hi in merged)


def alignment_score(r: Relation, lay: Layout) -> float:
    """|target interval & union of operand intervals| / |target interval|."""
    try:
        target = lay.interval(r.target)
        operands = [lay.interval(label) for label in r.operands]
    except KeyError as e:
        raise RelationError(f"layout has no group {e.args[0]!r}") from None
    height = target[1] - target[0]
    return min(1.0, _overlap(target, operands) / height)


def _rank_key(
    r: Relation, target_index: Dict[str, Tuple[int, int]], m_index: Dict[str, int]
) -> Tuple[float, int, int, int, int, int]:
    row, col = target_index[r.target]
    return (
        r.cost,
        row,
        col,
        m_index[r.operands[0]],
        r.run_length,
        r.correction,
    )


def _target_index(profile: CountProfile) -> Dict[str, Tuple[int, int]]:
    return {
        label: (row, col)
        for col, cid in enumerate(TARGET_COLUMNS)
        for row, label in enumerate(profile.labels[cid])  # type: ignore[index]
    }


def enumerate_relations(
    a: CountSource,
    cfg: Optional[SearchConfig] = None,
    lay: Optional[Layout] = None,
) -> List[Relation]:
    """
    Enumerate every relation within the search bounds, ranked.

    Args:
        a: Artifact, or a counts-only profile (no alignment filter)
        cfg: Search bounds and weights
        lay: Precomputed layout; built from the artifact when omitted

    Returns:
        Relations sorted by cost, then target row, column (G before D),
        first operand, run length and correction
    """
    cfg = cfg or SearchConfig()
    profile = _profile(a)
    if lay is None and isinstance(a, Artifact):
        lay = build_layout(a, cfg.pitch_mm)

    m_labels = profile.labels[OPERAND_COLUMN]  # type: ignore[index]
    m_counts = profile.counts[OPERAND_COLUMN]  # type: ignore[index]
    m_index = {label: i for i, label in enumerate(m_labels)}
    target_index = _target_index(profile)

    found: List[Relation] = []
    for cid in TARGET_COLUMNS:
        targets = zip(
            profile.labels[cid], profile.counts[cid]  # type: ignore[index]
        )
        for target, target_count in targets:
            for start in range(len(m_labels)):
                for run in range(1, cfg.max_run + 1):
                    if start + run > len(m_labels):
                        break
                    counts = m_counts[start : start + run]
                    correction = target_count - sum(counts)
                    if abs(correction) > cfg.max_correction_abs:
                        continue
                    candidate = Relation(
                        target=target,
                        operands=tuple(m_labels[start : start + run]),
                        correction=correction,
                        target_count=target_count,
                        operand_counts=tuple(counts),
                    )
                    alignment = 1.0
                    if lay is not None:
                        alignment = alignment_score(candidate, lay)
                        if alignment <= 0.0 or alignment < cfg.min_alignment:
                            continue
                    found.append(
                        candidate.model_copy(
                            update={
                                "cost": relation_cost(candidate, cfg),
                                "alignment": alignment,
                            }
                        )
                    )

    found.sort(key=lambda r: _rank_key(r, target_index, m_index))
    logger.debug(f"Enumerated {len(found)} relations for {profile.name}")
    return found


def verify_relation(r: Relation, a: CountSource) -> bool:
    """
    Check that count(target) = sum(count(operands)) + correction.

    Raises:
        RelationError: If a label is unknown or the operands are not a
            consecutive M-column run
    """
    profile = _profile(a)
    target_count = _count(profile, r.target)
    operand_counts = [_count(profile, label) for label in r.operands]
    m_labels = list(profile.labels[OPERAND_COLUMN])  # type: ignore[index]
    if any(label not in m_labels for label in r.operands):
        raise RelationError(f"operands {r.operands} are not all M-column groups")
    start = m_labels.index(r.operands[0])
    if tuple(m_labels[start : start + len(r.operands)]) != r.operands:
        raise RelationError(f"operands {r.operands} are not consecutive")
    return target_count == sum(operand_counts) + r.correction


def _targets_in_order(relations: Sequence[Relation]) -> List[str]:
    order = {cid: i for i, cid in enumerate(TARGET_COLUMNS)}
    return sorted({r.target for r in relations}, key=lambda t: (order[t[0]], t))


def simplest_cover(relations: Sequence[Relation]) -> Dict[str, Relation]:
    """Per target, the first relation in ranking order."""
    best: Dict[str, Relation] = {}
    for r in relations:
        best.setdefault(r.target, r)
    return {t: best[t] for t in _targets_in_order(relations)}


def aligned_cover(relations: Sequence[Relation]) -> Dict[str, Relation]:
    """Per target, the best-aligned relation; ties keep ranking order."""
    best: Dict[str, Relation] = {}
    for r in relations:
        current = best.get(r.target)
        if current is None or round(r.alignment, ALIGNMENT_DIGITS) > round(
            current.alignment, ALIGNMENT_DIGITS
        ):
            best[r.target] = r
    return {t: best[t] for t in _targets_in_order(relations)}


def uncovered_targets(relations: Sequence[Relation], a: CountSource) -> List[str]:
    """G/D targets with no relation."""
    profile = _profile(a)
    covered = {r.target for r in relations}
    return [
        label
        for cid in TARGET_COLUMNS
        for label in profile.labels[cid]  # type: ignore[index]
        if label not in covered
    ]


def cover_cost(cover: Dict[str, Relation]) -> float:
    """Sum of the relation costs in a cover."""
    return sum(r.cost for r in cover.values())


def correction_multiset(cover: Dict[str, Relation]) -> List[int]:
    """Corrections of a cover, sorted descending."""
    return sorted((r.correction for r in cover.values()), reverse=True)


def base12_tally(
    relations: Iterable[Relation],
    a: CountSource,
    reversed_targets: Sequence[str] = (),
) -> TallySummary:
    """
    Lay every relation's operand values into the M slots and aggregate.

    Targets listed in ``reversed_targets`` lay their operand values in
    reverse order (e.g. 7+5+5 instead of 5+5+7).
    """
    profile = _profile(a)
    m_labels = profile.labels[OPERAND_COLUMN]  # type: ignore[index]
    slots: Dict[str, int] = {label: 0 for label in m_labels}
    corrections: Counter = Counter()
    for r in relations:
        values = [_count(profile, label) for label in r.operands]
        if r.target in reversed_targets:
            values.reverse()
        for label, value in zip(r.operands, values):
            slots[label] += value
        if r.correction:
            corrections[r.correction] += r.correction
    multiples = tuple(
        label for label, v in slots.items() if v > 0 and v % 12 == 0
    )
    return TallySummary(
        slots=slots,
        corrections_by_value=dict(sorted(corrections.items(), reverse=True)),
        corrections_total=sum(corrections.values()),
        multiples_of_12=multiples,
    )
