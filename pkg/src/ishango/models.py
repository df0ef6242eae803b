"""Pydantic models for the engraved artifact and its derived views."""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ColumnId = Literal["M", "G", "D"]
MeVariant = Literal["me9", "me10"]

COLUMN_IDS: Tuple[ColumnId, ...] = ("M", "G", "D")


def default_labels(column: str, count: int) -> Tuple[str, ...]:
    """Group labels a, b, c... prefixed by the column letter."""
    return tuple(f"{column}{chr(ord('a') + i)}" for i in range(count))


class Notch(BaseModel):
    """One engraved mark."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    length_mm: Optional[float] = Field(
        default=None,
        gt=0,
        alias="len_mm",
        description="Tip-to-tip length, null when not recorded",
    )
    orientation_deg: float = Field(
        default=0.0,
        ge=-90,
        le=90,
        alias="orient_deg",
        description="0 = horizontal, positive = upward right-to-left",
    )
    curvature_note: Optional[str] = Field(default=None, description="Free text")
    interrupted: bool = Field(default=False, description="Notch broken mid-way")
    damaged: bool = Field(default=False, description="Notch lies on damaged bone")


class NotchGroup(BaseModel):
    """A cluster of approximately parallel notches read as one number."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    label: str = Field(min_length=2, description="Group label such as Mb or Gd")
    notches: Tuple[Notch, ...] = Field(description="Notches, top to bottom")
    gap_before_mm: float = Field(
        default=0.0,
        ge=0,
        description="Vertical distance from the previous group or bone edge",
    )
    intra_gaps_mm: Optional[Tuple[float, ...]] = Field(
        default=None,
        description="Vertical separation between consecutive notches",
    )
    extent_mm: Optional[float] = Field(
        default=None,
        gt=0,
        description="Measured vertical range of the group",
    )
    schemas: Tuple[str, ...] = Field(
        default_factory=tuple,
        description="Candidate s/m/L readings of the group",
    )

    @field_validator("notches")
    @classmethod
    def validate_notches(cls, v: Tuple[Notch, ...]) -> Tuple[Notch, ...]:
        """Forbid empty groups."""
        if len(v) < 1:
            raise ValueError("a group needs at least one notch")
        return v

    @model_validator(mode="after")
    def validate_intra_gaps(self) -> "NotchGroup":
        """Check intra gaps line up with the notches."""
        if self.intra_gaps_mm is not None:
            if len(self.intra_gaps_mm) != len(self.notches) - 1:
                raise ValueError(
                    f"intra_gaps_mm has {len(self.intra_gaps_mm)} entries, "
                    f"expected {len(self.notches) - 1}"
                )
            if any(g < 0 for g in self.intra_gaps_mm):
                raise ValueError("intra_gaps_mm must be non-negative")
        return self

    @property
    def count(self) -> int:
        """Number of notches."""
        return len(self.notches)

    @property
    def lengths(self) -> List[Optional[float]]:
        """Notch lengths in order."""
        return [n.length_mm for n in self.notches]


class Column(BaseModel):
    """One of the three notch columns."""

    model_config = ConfigDict(frozen=True)

    id: ColumnId = Field(description="Column letter")
    groups: Tuple[NotchGroup, ...] = Field(
        default_factory=tuple,
        description="Groups, top to bottom",
    )

    @model_validator(mode="after")
    def validate_labels(self) -> "Column":
        """Group labels are unique and carry the column letter."""
        seen = set()
        for group in self.groups:
            if not group.label.startswith(self.id):
                raise ValueError(
                    f"group {group.label} does not belong to column {self.id}"
                )
            if group.label in seen:
                raise ValueError(f"duplicate group label {group.label}")
            seen.add(group.label)
        return self

    @property
    def counts(self) -> List[int]:
        """Notch counts per group, top to bottom."""
        return [g.count for g in self.groups]


class CountProfile(BaseModel):
    """Counts-only view of an artifact."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(default="counts", description="Profile name")
    counts: Dict[ColumnId, Tuple[int, ...]] = Field(
        description="Notch counts per group for each column"
    )
    labels: Dict[ColumnId, Tuple[str, ...]] = Field(
        default_factory=dict,
        description="Group labels; generated when omitted",
    )

    @model_validator(mode="before")
    @classmethod
    def fill_labels(cls, data: Any) -> Any:
        """Generate labels for columns that have none."""
        if isinstance(data, dict):
            counts = dict(data.get("counts") or {})
            labels = dict(data.get("labels") or {})
            for cid in COLUMN_IDS:
                counts.setdefault(cid, ())
                if cid not in labels:
                    labels[cid] = default_labels(cid, len(counts[cid]))
            data = {**data, "counts": counts, "labels": labels}
        return data

    @model_validator(mode="after")
    def validate_counts(self) -> "CountProfile":
        """Labels match counts and counts are positive."""
        for cid in COLUMN_IDS:
            if len(self.labels[cid]) != len(self.counts[cid]):
                raise ValueError(f"column {cid}: labels and counts differ in length")
            if any(c < 1 for c in self.counts[cid]):
                raise ValueError(f"column {cid}: counts must be positive")
        return self

    def column(self, cid: ColumnId) -> Tuple[int, ...]:
        """Counts of one column (empty when absent)."""
        return self.counts[cid]

    def count_of(self, label: str) -> int:
        """Count of the group with the given label."""
        for cid, names in self.labels.items():
            if label in names:
                return self.counts[cid][names.index(label)]
        raise KeyError(label)


class Artifact(BaseModel):
    """The engraved bone as structured data."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1, description="Artifact name")
    me_variant: MeVariant = Field(
        default="me10",
        description="Whether the interrupted Me notch is counted",
    )
    columns: Tuple[Column, ...] = Field(description="Columns M, G and D")

    @field_validator("columns")
    @classmethod
    def validate_columns(cls, v: Tuple[Column, ...]) -> Tuple[Column, ...]:
        """Exactly the three columns M, G and D."""
        ids = sorted(c.id for c in v)
        if ids != sorted(COLUMN_IDS):
            raise ValueError(f"expected columns M, G, D; got {', '.join(ids)}")
        return v

    def column(self, cid: ColumnId) -> Column:
        """Get a column by id."""
        for c in self.columns:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def group(self, label: str) -> NotchGroup:
        """Get a group by label."""
        for c in self.columns:
            for g in c.groups:
                if g.label == label:
                    return g
        raise KeyError(label)

    def has_group(self, label: str) -> bool:
        """Check whether a group label exists."""
        return any(g.label == label for c in self.columns for g in c.groups)

    @property
    def total_notches(self) -> int:
        """Total notch count over all columns."""
        return sum(g.count for c in self.columns for g in c.groups)

    def counts(self) -> CountProfile:
        """Counts-only view."""
        return CountProfile(
            name=self.name,
            counts={c.id: tuple(c.counts) for c in self.columns},
            labels={c.id: tuple(g.label for g in c.groups) for c in self.columns},
        )


class Layout(BaseModel):
    """Vertical interval occupied by each group, in mm from the bone top."""

    model_config = ConfigDict(frozen=True)

    intervals: Dict[str, Tuple[float, float]] = Field(
        description="Group label to (top_mm, bottom_mm)"
    )
    columns: Dict[ColumnId, Tuple[str, ...]] = Field(
        default_factory=dict,
        description="Group labels per column, top to bottom",
    )

    @model_validator(mode="after")
    def validate_intervals(self) -> "Layout":
        """Intervals are non-empty and ordered within each column."""
        for label, (top, bottom) in self.intervals.items():
            if not bottom > top:
                raise ValueError(f"group {label}: bottom must exceed top")
        for cid, labels in self.columns.items():
            for upper, lower in zip(labels, labels[1:]):
                if self.intervals[upper][1] > self.intervals[lower][0]:
                    raise ValueError(f"column {cid}: {upper} overlaps {lower}")
        return self

    def interval(self, label: str) -> Tuple[float, float]:
        """Get the interval of a group."""
        return self.intervals[label]

    @property
    def height_mm(self) -> float:
        """Lowest bottom over all groups."""
        return max((b for _, b in self.intervals.values()), default=0.0)
