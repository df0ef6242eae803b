"""Competing readings of the bone, scored as comparable checklists."""

import logging
import math
from typing import Any, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ishango.artifact import column_sum
from ishango.models import Artifact
from ishango.relations import (
    SearchConfig,
    aligned_cover,
    base12_tally,
    correction_multiset,
    cover_cost,
    enumerate_relations,
    simplest_cover,
    uncovered_targets,
)
from ishango.schema import classify_notches, subgroup_sizes

HypothesisName = Literal[
    "slide_rule_base12", "prime", "decimal", "lunar", "duplication_families"
]
ComponentKind = Literal["check", "objection", "metric"]

SYNODIC_MONTH_DAYS = 29.5306
FAMILY_GAP_MM = 10.0
DECIMAL_SET = frozenset({9, 11, 19, 21})

logger = logging.getLogger(__name__)


class Component(BaseModel):
    """One check, objection or measured value inside a score."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(description="Component name")
    kind: ComponentKind = Field(description="check, objection or metric")
    passed: Optional[bool] = Field(
        default=None, description="For checks: supporting evidence holds"
    )
    raised: Optional[bool] = Field(
        default=None, description="For objections: counter-evidence present"
    )
    value: Any = Field(default=None, description="Measured value or detail")


class HypothesisScore(BaseModel):
    """A named reading with its components and a simplicity cost."""

    model_config = ConfigDict(frozen=True)

    name: HypothesisName = Field(description="Hypothesis name")
    components: Tuple[Component, ...] = Field(description="Checks and metrics")
    total_cost: float = Field(ge=0.0, description="Lower is simpler/better")
    notes: str = Field(default="", description="Free text")

    @field_validator("components")
    @classmethod
    def validate_components(cls, v: Tuple[Component, ...]) -> Tuple[Component, ...]:
        """A score needs at least one component."""
        if not v:
            raise ValueError("components must not be empty")
        return v

    def component(self, name: str) -> Component:
        """Get a component by name."""
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)


def _check(name: str, passed: bool, value: Any = None) -> Component:
    return Component(name=name, kind="check", passed=passed, value=value)


def _objection(name: str, raised: bool, value: Any = None) -> Component:
    return Component(name=name, kind="objection", raised=raised, value=value)


def _metric(name: str, value: Any) -> Component:
    return Component(name=name, kind="metric", value=value)


def checklist_cost(components: Sequence[Component]) -> float:
    """Failed checks plus raised objections."""
    failed = sum(1 for c in components if c.kind == "check" and c.passed is False)
    raised = sum(1 for c in components if c.kind == "objection" and c.raised)
    return float(failed + raised)


def is_prime(n: int) -> bool:
    """Deterministic trial division."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def uncovered_penalty(cfg: SearchConfig) -> float:
    """Cost charged for a target no relation reaches."""
    return (cfg.max_run - 1) + cfg.correction_weight * cfg.max_correction_abs + 1


def score_slide_rule(
    a: Artifact, cfg: Optional[SearchConfig] = None
) -> HypothesisScore:
    """
    Score the slide-rule / base-12 reading.

    total_cost is the cost of the simplest cover plus a penalty for every
    G/D target no relation reaches.
    """
    cfg = cfg or SearchConfig()
    relations = enumerate_relations(a, cfg)
    simple = simplest_cover(relations)
    aligned = aligned_cover(relations)
    missing = uncovered_targets(relations, a)

    g_labels = [g.label for g in a.column("G").groups]
    reversed_targets = g_labels[-1:]
    tally = base12_tally(aligned.values(), a, reversed_targets=reversed_targets)
    sums = {cid: column_sum(a, cid) for cid in ("M", "G", "D")}

    components = (
        _check("all_targets_covered", not missing, missing),
        _metric("simplest_cover_cost", cover_cost(simple)),
        _metric("simplest_cover", [r.describe() for r in simple.values()]),
        _metric("simplest_corrections", correction_multiset(simple)),
        _metric("aligned_cover_cost", cover_cost(aligned)),
        _metric("aligned_cover", [r.describe() for r in aligned.values()]),
        _metric("aligned_corrections", correction_multiset(aligned)),
        _check(
            "column_sums_divisible_by_12",
            all(s % 12 == 0 for s in sums.values()),
            sums,
        ),
        _check(
            "base12_multiples",
            bool(tally.multiples_of_12),
            {"slots": tally.slots, "multiples": list(tally.multiples_of_12)},
        ),
    )
    total = cover_cost(simple) + uncovered_penalty(cfg) * len(missing)
    logger.debug(f"Slide rule on {a.name} ({a.me_variant}): cost {total}")
    return HypothesisScore(
        name="slide_rule_base12",
        components=components,
        total_cost=total,
        notes=(
            "Corrections are reported as found; no reason for them is inferred."
        ),
    )


def score_prime(a: Artifact) -> HypothesisScore:
    """G column as the primes between 10 and 20."""
    g = a.column("G").counts
    m = a.column("M").counts
    everything = [grp.count for col in a.columns for grp in col.groups]
    primes_10_20 = [n for n in range(11, 20) if is_prime(n)]
    m_primes = sorted({n for n in m if is_prime(n)})
    components = (
        _check("all_prime", bool(g) and all(is_prime(n) for n in g), g),
        _check("exactly_primes_10_20", sorted(g) == primes_10_20, primes_10_20),
        _objection("m_primes_not_singled_out", bool(m_primes), m_primes),
        _objection("two_absent", 2 not in everything),
    )
    return HypothesisScore(
        name="prime", components=components, total_cost=checklist_cost(components)
    )


def _monotone(values: Sequence[int]) -> bool:
    pairs = list(zip(values, values[1:]))
    return all(x <= y for x, y in pairs) or all(x >= y for x, y in pairs)


def score_decimal(a: Artifact) -> HypothesisScore:
    """D column as 10 +/- 1 and 20 +/- 1."""
    d = a.column("D").counts
    components = (
        _check("decimal_set", set(d) == DECIMAL_SET, sorted(DECIMAL_SET)),
        _objection("not_monotone", not _monotone(d), d),
    )
    return HypothesisScore(
        name="decimal", components=components, total_cost=checklist_cost(components)
    )


def lunar_residual(
    total: int, month: float = SYNODIC_MONTH_DAYS
) -> Tuple[int, float]:
    """Nearest whole number of months and the residual in days."""
    k = max(1, round(total / month))
    return k, abs(total - k * month)


def score_lunar(a: Artifact, month: float = SYNODIC_MONTH_DAYS) -> HypothesisScore:
    """Total notch count against whole synodic months."""
    total = a.total_notches
    k, residual = lunar_residual(total, month)
    components = (
        _metric("total_notches", total),
        _metric("months", k),
        _metric("residual_days", residual),
        _metric("residual_fraction", residual / month),
    )
    return HypothesisScore(
        name="lunar",
        components=components,
        total_cost=residual,
        notes="Only the total count is compared; no phase-by-phase matching.",
    )


def families(a: Artifact, gap_mm: float = FAMILY_GAP_MM) -> List[List[str]]:
    """
    Split the M column into families.

    A group joins the current family when it sits closer than ``gap_mm``
    to the previous group, or when its count is a duplication (plus at most
    2) of the family's lead count.
    """
    out: List[List[str]] = []
    lead = 0
    for g in a.column("M").groups:
        joins = bool(out) and (
            g.gap_before_mm < gap_mm
            or g.count in (2 * lead, 2 * lead + 1, 2 * lead + 2)
        )
        if joins:
            out[-1].append(g.label)
        else:
            out.append([g.label])
            lead = g.count
    return out


def score_duplication(
    a: Artifact, gap_mm: float = FAMILY_GAP_MM
) -> HypothesisScore:
    """Duplication and families of groups in the M column."""
    m_groups = a.column("M").groups
    counts = [g.count for g in m_groups]
    doubled = (
        len(counts) >= 4
        and counts[1] == 2 * counts[0]
        and counts[3] == 2 * counts[2]
    )

    fams = families(a, gap_mm)
    firsts = {fam[0] for fam in fams}
    boundary_gaps = [a.group(fam[0]).gap_before_mm for fam in fams[1:]]
    small_gaps = [
        g.gap_before_mm
        for g in m_groups
        if g.label not in firsts and g.gap_before_mm < gap_mm
    ]
    separated = (
        not boundary_gaps
        or not small_gaps
        or min(boundary_gaps) > max(small_gaps)
    )

    leads = [a.group(fam[0]).count for fam in fams]
    split = subgroup_sizes(classify_notches(m_groups[-1])) if m_groups else []
    seven = (
        len(split) == 2 and len(leads) >= 2 and sorted(split) == sorted(leads[:2])
    )
    increasing = all(x < y for x, y in zip(leads, leads[1:]))

    components = (
        _check("doubling", doubled, counts[:4]),
        _check(
            "family_gaps_separate",
            separated,
            {"between": boundary_gaps, "within": small_gaps},
        ),
        _metric(
            "families", [[a.group(label).count for label in fam] for fam in fams]
        ),
        _check("last_group_is_sum_of_bases", seven, split),
        _check("family_leads_increasing", increasing, leads),
    )
    return HypothesisScore(
        name="duplication_families",
        components=components,
        total_cost=checklist_cost(components),
    )


def score_all(
    a: Artifact, cfg: Optional[SearchConfig] = None
) -> List[HypothesisScore]:
    """All five scores in a fixed order."""
    return [
        score_slide_rule(a, cfg),
        score_prime(a),
        score_decimal(a),
        score_lunar(a),
        score_duplication(a),
    ]
