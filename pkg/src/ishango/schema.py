"""s/m/L pattern schemas: parsing, rendering, length classification and matching.

Grammar (whitespace ignored)::

    schema := term ('+' term)*
    term   := INT CLASS ['(?)'] | '(' schema ')'
    CLASS  := 's' | 'm' | 'L'
"""

import logging
from typing import Dict, List, Literal, Optional, Set, Tuple, Union, cast

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ishango.errors import SchemaParseError
from ishango.models import NotchGroup

SizeClass = Literal["s", "m", "L"]

CLASS_RANK: Dict[str, int] = {"s": 0, "m": 1, "L": 2}
UNCERTAIN_MARK = "(?)"

DEFAULT_LENGTH_GAP_MM = 2.0
DEFAULT_VERTICAL_GAP_MM = 3.0
MAX_BOUNDARIES = 2
# Relative slack on gap thresholds; keeps classification scale-invariant.
GAP_REL_TOL = 1e-9

logger = logging.getLogger(__name__)


class SchemaLeaf(BaseModel):
    """A run of notches of one length class, e.g. ``3s`` or ``2L(?)``."""

    model_config = ConfigDict(frozen=True)

    count: int = Field(gt=0, description="Number of notches")
    size_class: SizeClass = Field(description="s, m or L")
    uncertain: bool = Field(default=False, description="Marked with (?)")


class Schema(BaseModel):
    """A '+'-joined sequence of leaves and parenthesised sub-schemas."""

    model_config = ConfigDict(frozen=True)

    terms: Tuple[Union[SchemaLeaf, "Schema"], ...] = Field(min_length=1)

    @property
    def leaves(self) -> List[SchemaLeaf]:
        """Leaves in reading order."""
        out: List[SchemaLeaf] = []
        for term in self.terms:
            if isinstance(term, SchemaLeaf):
                out.append(term)
            else:
                out.extend(term.leaves)
        return out

    @property
    def leaf_total(self) -> int:
        """Total number of notches described."""
        return sum(leaf.count for leaf in self.leaves)


Schema.model_rebuild()


class ClassifiedGroup(BaseModel):
    """Per-notch length classes and spacing-based subgroup boundaries."""

    model_config = ConfigDict(frozen=True)

    label: str = Field(description="Group label")
    lengths: Tuple[Optional[float], ...] = Field(description="Notch lengths")
    classes: Tuple[Optional[SizeClass], ...] = Field(
        description="Length class per notch; None where the length is unknown"
    )
    subgroup_boundaries: Tuple[int, ...] = Field(
        default_factory=tuple,
        description="Positions p where a subgroup starts at notch p",
    )
    uniform: bool = Field(description="All known lengths form one cluster")

    @model_validator(mode="after")
    def validate_classes(self) -> "ClassifiedGroup":
        """Classes line up with the notches and respect length order."""
        if len(self.classes) != len(self.lengths):
            raise ValueError("one class per notch required")
        known = [
            (CLASS_RANK[c], x)
            for c, x in zip(self.classes, self.lengths)
            if c is not None and x is not None
        ]
        for rank_a, len_a in known:
            for rank_b, len_b in known:
                if rank_a < rank_b and len_a > len_b:
                    raise ValueError("length classes out of order")
        return self


class MatchResult(BaseModel):
    """Outcome of matching a group against a schema."""

    model_config = ConfigDict(frozen=True)

    matched: bool
    reason: Optional[str] = Field(default=None, description="Why it failed")
    leaf_spans: Tuple[Tuple[int, int], ...] = Field(
        default_factory=tuple,
        description="Notch index range [start, end) covered by each leaf",
    )
    class_map: Dict[str, str] = Field(
        default_factory=dict,
        description="Detected class to schema letter",
    )


def _is_ascii_digit(ch: str) -> bool:
    return len(ch) == 1 and "0" <= ch <= "9"


def _reaches(gap: float, threshold: float) -> bool:
    return gap >= threshold * (1 - GAP_REL_TOL)


class _Parser:
    """Recursive descent over a schema string."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _error(self, message: str) -> SchemaParseError:
        return SchemaParseError(f"{message} in {self.text!r}", position=self.pos)

    def parse(self) -> Schema:
        schema = self._schema()
        if self._peek():
            raise self._error(f"unexpected {self._peek()!r}")
        return schema

    def _schema(self) -> Schema:
        terms: List[Union[SchemaLeaf, Schema]] = [self._term()]
        while self._peek() == "+":
            self.pos += 1
            terms.append(self._term())
        return Schema(terms=tuple(terms))

    def _term(self) -> Union[SchemaLeaf, Schema]:
        ch = self._peek()
        if ch == "(":
            self.pos += 1
            inner = self._schema()
            if self._peek() != ")":
                raise self._error("unbalanced parentheses, expected ')'")
            self.pos += 1
            return inner
        if not _is_ascii_digit(ch):
            raise self._error("expected a count or '('" if ch else "unexpected end")
        start = self.pos
        while self.pos < len(self.text) and _is_ascii_digit(self.text[self.pos]):
            self.pos += 1
        count = int(self.text[start : self.pos])
        if count == 0:
            self.pos = start
            raise self._error("count must be positive")
        letter = self._peek()
        if letter not in CLASS_RANK:
            raise self._error(f"unknown class letter {letter!r} (s, m or L)")
        self.pos += 1
        uncertain = self._uncertain_mark()
        return SchemaLeaf(
            count=count, size_class=cast(SizeClass, letter), uncertain=uncertain
        )

    def _uncertain_mark(self) -> bool:
        save = self.pos
        for expected in UNCERTAIN_MARK:
            if self._peek() != expected:
                self.pos = save
                return False
            self.pos += 1
        return True


def parse_schema(text: str) -> Schema:
    """
    Parse a schema string such as ``"2m+((7L)+(3L+2m)+(1s+3m+1s))"``.

    Raises:
        SchemaParseError: With the offending position
    """
    return _Parser(text).parse()


def render_schema(s: Schema) -> str:
    """Canonical text form; reparses to an equal schema."""
    parts = []
    for term in s.terms:
        if isinstance(term, SchemaLeaf):
            mark = UNCERTAIN_MARK if term.uncertain else ""
            parts.append(f"{term.count}{term.size_class}{mark}")
        else:
            parts.append(f"({render_schema(term)})")
    return "+".join(parts)


def schema_leaf_total(s: Schema) -> int:
    """Total notch count described by a schema."""
    return s.leaf_total


def schema_boundaries(s: Schema) -> Set[int]:
    """Interior positions where a parenthesised sub-schema starts or ends."""
    total = s.leaf_total
    found: Set[int] = set()

    def walk(node: Schema, offset: int, nested: bool) -> int:
        if nested:
            found.add(offset)
        cursor = offset
        for term in node.terms:
            if isinstance(term, SchemaLeaf):
                cursor += term.count
            else:
                cursor = walk(term, cursor, True)
        if nested:
            found.add(cursor)
        return cursor

    walk(s, 0, False)
    return {p for p in found if 0 < p < total}


def _length_clusters(lengths: List[float], gap_len_mm: float) -> List[float]:
    """Upper bounds of each cluster except the last, ascending."""
    values = np.sort(np.asarray(lengths, dtype=float))
    if values.size < 2:
        return []
    dy = np.diff(values)
    candidates = np.where(dy >= gap_len_mm * (1 - GAP_REL_TOL))[0]
    if candidates.size > MAX_BOUNDARIES:
        # stable: equal gaps keep the earlier position
        ratios = np.round(dy / gap_len_mm, 6)
        by_size = sorted(candidates.tolist(), key=lambda i: (-ratios[i], i))
        candidates = np.asarray(sorted(by_size[:MAX_BOUNDARIES]))
    return [float(values[i]) for i in candidates]


def classify_notches(
    g: NotchGroup,
    gap_len_mm: float = DEFAULT_LENGTH_GAP_MM,
    gap_vert_mm: float = DEFAULT_VERTICAL_GAP_MM,
) -> ClassifiedGroup:
    """
    Classify each notch as s, m or L and find spacing-based subgroups.

    Lengths are clustered by breaking the sorted lengths at gaps of at
    least ``gap_len_mm`` (keeping the two widest). One cluster is a uniform
    group and is labelled m; two clusters are s and L; three are s, m, L.

    Args:
        g: The notch group
        gap_len_mm: Minimum length difference separating two clusters
        gap_vert_mm: Minimum vertical gap separating two subgroups

    Returns:
        ClassifiedGroup
    """
    known = [x for x in g.lengths if x is not None]
    cuts = _length_clusters(known, gap_len_mm)
    letters: Tuple[SizeClass, ...]
    if len(cuts) == 0:
        letters = ("m",)
    elif len(cuts) == 1:
        letters = ("s", "L")
    else:
        letters = ("s", "m", "L")

    classes: List[Optional[SizeClass]] = []
    for x in g.lengths:
        if x is None:
            classes.append(None)
        else:
            classes.append(letters[sum(1 for c in cuts if x > c)])

    boundaries: Tuple[int, ...] = ()
    if g.intra_gaps_mm is not None:
        boundaries = tuple(
            i + 1 for i, gap in enumerate(g.intra_gaps_mm) if _reaches(gap, gap_vert_mm)
        )

    result = ClassifiedGroup(
        label=g.label,
        lengths=tuple(g.lengths),
        classes=tuple(classes),
        subgroup_boundaries=boundaries,
        uniform=len(cuts) == 0,
    )
    logger.debug(f"Classified {g.label}: {''.join(c or '?' for c in classes)}")
    return result


def subgroup_sizes(c: ClassifiedGroup) -> List[int]:
    """Sizes of the subgroups split at the detected boundaries."""
    edges = [0, *c.subgroup_boundaries, len(c.classes)]
    return [b - a for a, b in zip(edges, edges[1:])]


def _expand(s: Schema) -> Tuple[List[Tuple[SizeClass, bool]], List[Tuple[int, int]]]:
    positions: List[Tuple[SizeClass, bool]] = []
    spans: List[Tuple[int, int]] = []
    for leaf in s.leaves:
        spans.append((len(positions), len(positions) + leaf.count))
        positions.extend([(leaf.size_class, leaf.uncertain)] * leaf.count)
    return positions, spans


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def match_schema(
    g: NotchGroup,
    s: Schema,
    gap_len_mm: float = DEFAULT_LENGTH_GAP_MM,
    gap_vert_mm: float = DEFAULT_VERTICAL_GAP_MM,
) -> MatchResult:
    """
    Match a notch group against a schema.

    The detected classes must map order-isomorphically onto the schema
    letters: equal classes get equal letters and shorter classes get
    smaller letters. Notches under uncertain leaves or with unknown length
    are not constrained. When spacing data exists, every parenthesis
    boundary must be a detected subgroup boundary.
    """
    if s.leaf_total != g.count:
        return MatchResult(
            matched=False,
            reason=f"schema describes {s.leaf_total} notches, group has {g.count}",
        )

    classified = classify_notches(g, gap_len_mm, gap_vert_mm)
    positions, spans = _expand(s)
    constrained = [
        (CLASS_RANK[detected], CLASS_RANK[letter], detected, letter)
        for detected, (letter, uncertain) in zip(classified.classes, positions)
        if detected is not None and not uncertain
    ]
    for i, (det_a, let_a, _, _) in enumerate(constrained):
        for det_b, let_b, _, _ in constrained[i + 1 :]:
            if _sign(det_a - det_b) != _sign(let_a - let_b):
                return MatchResult(matched=False, reason="length classes differ")

    if g.intra_gaps_mm is not None:
        missing = schema_boundaries(s) - set(classified.subgroup_boundaries)
        if missing:
            return MatchResult(
                matched=False,
                reason=f"no spacing gap at position(s) {sorted(missing)}",
            )

    return MatchResult(
        matched=True,
        leaf_spans=tuple(spans),
        class_map={det: let for _, _, det, let in constrained},
    )


def matching_schemas(
    g: NotchGroup,
    gap_len_mm: float = DEFAULT_LENGTH_GAP_MM,
    gap_vert_mm: float = DEFAULT_VERTICAL_GAP_MM,
) -> List[str]:
    """The group's stored candidate schemas that match its geometry."""
    return [
        text
        for text in g.schemas
        if match_schema(g, parse_schema(text), gap_len_mm, gap_vert_mm).matched
    ]
