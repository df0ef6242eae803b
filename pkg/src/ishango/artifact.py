"""Loading, counting and laying out the engraved artifact."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from pydantic import ValidationError

from ishango.config import Settings, get_settings
from ishango.errors import ArtifactParseError, ArtifactValidationError
from ishango.models import (
    COLUMN_IDS,
    Artifact,
    CountProfile,
    ColumnId,
    Layout,
    MeVariant,
    NotchGroup,
    default_labels,
)

# Constants
DEFAULT_PITCH_MM = 2.5
MIN_EXTENT_MM = 1.0
DEFAULT_VARIANT_GROUP = "Me"

logger = logging.getLogger(__name__)


def _parse_variant(variant: Any) -> Optional[MeVariant]:
    if variant is None:
        return None
    if not isinstance(variant, str):
        raise ArtifactValidationError(f"variant must be a string, got {variant!r}")
    v = variant.lower().replace("(", "").replace(")", "")
    if v not in ("me9", "me10"):
        raise ArtifactValidationError(f"unknown variant {variant!r} (me9 or me10)")
    return v  # type: ignore[return-value]


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_shape(doc: Mapping[str, Any]) -> None:
    """Check the nesting the variant rewrite walks before touching it."""
    columns = doc.get("columns", [])
    if not isinstance(columns, list):
        raise ArtifactValidationError("columns must be a list")
    for i, column in enumerate(columns):
        if not isinstance(column, dict):
            raise ArtifactValidationError(f"columns.{i} must be an object")
        groups = column.get("groups", [])
        if not isinstance(groups, list):
            raise ArtifactValidationError(f"columns.{i}.groups must be a list")
        for j, group in enumerate(groups):
            if not isinstance(group, dict):
                raise ArtifactValidationError(
                    f"columns.{i}.groups.{j} must be an object"
                )
            label = group.get("label")
            label = label if isinstance(label, str) else None
            notches = group.get("notches", [])
            if not isinstance(notches, list) or not all(
                isinstance(n, dict) for n in notches
            ):
                raise ArtifactValidationError(
                    "notches must be a list of objects", group=label
                )
            gaps = group.get("intra_gaps_mm")
            if gaps is not None and (
                not isinstance(gaps, list) or not all(_is_number(g) for g in gaps)
            ):
                raise ArtifactValidationError(
                    "intra_gaps_mm must be a list of numbers", group=label
                )
            if not _is_number(group.get("gap_before_mm", 0.0)):
                raise ArtifactValidationError(
                    "gap_before_mm must be a number", group=label
                )


def _apply_variant(doc: Dict[str, Any], variant: MeVariant, group_label: str) -> None:
    """Drop the interrupted trailing notches of the variant group for Me9."""
    if variant != "me9":
        return
    for column in doc.get("columns", []):
        groups = column.get("groups", [])
        for index, group in enumerate(groups):
            if group.get("label") != group_label:
                continue
            notches = list(group.get("notches", []))
            dropped = 0
            while notches and notches[-1].get("interrupted"):
                notches.pop()
                dropped += 1
            if not dropped:
                return
            group["notches"] = notches
            freed = 0.0
            gaps = group.get("intra_gaps_mm")
            if gaps is not None:
                kept = len(gaps) - dropped
                freed = float(sum(gaps[kept:]))
                group["intra_gaps_mm"] = gaps[:kept]
            if freed and index + 1 < len(groups):
                following = groups[index + 1]
                following["gap_before_mm"] = (
                    float(following.get("gap_before_mm", 0.0)) + freed
                )
            logger.debug(
                f"Variant me9: dropped {dropped} notch(es) from {group_label}, "
                f"moved {freed} mm to the next gap"
            )
            return


def _group_label_at(doc: Mapping[str, Any], loc: Sequence[Any]) -> Optional[str]:
    """Find the label of the group a pydantic error location points into."""
    try:
        if loc[0] == "columns" and loc[2] == "groups":
            label = doc["columns"][loc[1]]["groups"][loc[3]].get("label")
            return str(label) if label is not None else None
    except (IndexError, KeyError, TypeError, AttributeError):
        pass
    return None


def _check_expectations(doc: Mapping[str, Any], artifact: Artifact) -> None:
    expected_columns = doc.get("expected_columns") or {}
    if not isinstance(expected_columns, dict):
        raise ArtifactValidationError("expected_columns must be an object")
    for cid, expected in expected_columns.items():
        if cid not in COLUMN_IDS:
            raise ArtifactValidationError(f"unknown column {cid!r} in expected_columns")
        actual = len(artifact.column(cid).groups)
        if actual != expected:
            raise ArtifactValidationError(
                f"column {cid} has {actual} groups, expected {expected}"
            )
    expected_totals = doc.get("expected_totals") or {}
    if not isinstance(expected_totals, dict):
        raise ArtifactValidationError("expected_totals must be an object")
    expected = expected_totals.get(artifact.me_variant)
    if expected is not None and artifact.total_notches != expected:
        raise ArtifactValidationError(
            f"total notch count {artifact.total_notches} != {expected} "
            f"for variant {artifact.me_variant}"
        )


def load_artifact(
    text: str,
    variant: Optional[str] = None,
    path: Optional[str] = None,
) -> Artifact:
    """
    Load and validate an artifact document.

    Args:
        text: JSON artifact document
        variant: "me9" or "me10"; defaults to the document's me_variant
        path: Where the text came from, used in error messages

    Returns:
        The validated Artifact

    Raises:
        ArtifactParseError: If the document is not well-formed JSON
        ArtifactValidationError: If the document shape or a model invariant
            is wrong
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ArtifactParseError(e.msg, path=path, line=e.lineno, column=e.colno)
    if not isinstance(doc, dict):
        raise ArtifactParseError("top level must be an object", path=path, line=1)

    chosen = _parse_variant(variant) or _parse_variant(doc.get("me_variant", "me10"))
    assert chosen is not None
    doc["me_variant"] = chosen
    _check_shape(doc)
    _apply_variant(doc, chosen, doc.get("variant_group", DEFAULT_VARIANT_GROUP))

    try:
        artifact = Artifact.model_validate(
            {k: doc[k] for k in ("name", "me_variant", "columns") if k in doc}
        )
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first.get("loc", ()))
        where = ".".join(str(p) for p in loc)
        raise ArtifactValidationError(
            f"{first.get('msg', 'invalid')} ({where})",
            group=_group_label_at(doc, loc),
        ) from e

    _check_expectations(doc, artifact)
    logger.info(
        f"Loaded artifact {artifact.name} ({artifact.me_variant}, "
        f"{artifact.total_notches} notches)"
    )
    return artifact


def load_artifact_file(path: Path | str, variant: Optional[str] = None) -> Artifact:
    """Load an artifact document from a file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ArtifactParseError(str(e.strerror or e), path=str(p))
    except UnicodeDecodeError as e:
        raise ArtifactParseError(
            f"not valid UTF-8 at byte {e.start}: {e.reason}", path=str(p)
        ) from e
    return load_artifact(text, variant=variant, path=str(p))


def load_bundled(
    variant: Optional[str] = None, settings: Optional[Settings] = None
) -> Artifact:
    """Load the bundled Ishango dataset (or its ISHANGO_DATA_DIR override)."""
    settings = settings or get_settings()
    return load_artifact_file(settings.artifact_path, variant=variant)


def column_sum(a: Artifact, c: ColumnId) -> int:
    """Sum of notch counts over a column."""
    return sum(a.column(c).counts)


def group_counts(a: Artifact, c: ColumnId) -> List[int]:
    """Notch counts per group, top to bottom."""
    return a.column(c).counts


def group_extent(group: NotchGroup, pitch_mm: float = DEFAULT_PITCH_MM) -> float:
    """Vertical extent: measured, else summed spacing, else pitch-based."""
    if group.extent_mm is not None:
        extent = group.extent_mm
    elif group.intra_gaps_mm is not None:
        extent = float(sum(group.intra_gaps_mm))
    else:
        extent = (group.count - 1) * pitch_mm
    return max(extent, MIN_EXTENT_MM)


def layout(a: Artifact, pitch_mm: float = DEFAULT_PITCH_MM) -> Layout:
    """
    Place every group on a vertical axis measured from the bone top.

    Args:
        a: The artifact
        pitch_mm: Notch pitch for groups without measured spacing

    Returns:
        Layout with one (top_mm, bottom_mm) interval per group
    """
    if pitch_mm <= 0:
        raise ValueError("pitch_mm must be positive")
    intervals: Dict[str, Tuple[float, float]] = {}
    columns: Dict[ColumnId, Tuple[str, ...]] = {}
    for column in a.columns:
        cursor = 0.0
        for group in column.groups:
            top = cursor + group.gap_before_mm
            bottom = top + group_extent(group, pitch_mm)
            intervals[group.label] = (top, bottom)
            cursor = bottom
        columns[column.id] = tuple(g.label for g in column.groups)
    return Layout(intervals=intervals, columns=columns)


def notch_offsets(group: NotchGroup, pitch_mm: float = DEFAULT_PITCH_MM) -> List[float]:
    """Offset of each notch below its group's top, within the group extent."""
    extent = group_extent(group, pitch_mm)
    if group.count == 1:
        return [0.0]
    if group.intra_gaps_mm is not None and sum(group.intra_gaps_mm) > 0:
        scale = extent / sum(group.intra_gaps_mm)
        offsets = [0.0]
        for gap in group.intra_gaps_mm:
            offsets.append(offsets[-1] + gap * scale)
        return offsets
    step = extent / (group.count - 1)
    return [i * step for i in range(group.count)]


def render_artifact_document(a: Artifact) -> str:
    """Serialise an artifact back to the document format."""
    columns = []
    for column in a.columns:
        groups = []
        for g in column.groups:
            entry: Dict[str, Any] = {
                "label": g.label,
                "gap_before_mm": g.gap_before_mm,
            }
            if g.extent_mm is not None:
                entry["extent_mm"] = g.extent_mm
            if g.intra_gaps_mm is not None:
                entry["intra_gaps_mm"] = list(g.intra_gaps_mm)
            if g.schemas:
                entry["schemas"] = list(g.schemas)
            entry["notches"] = [
                n.model_dump(by_alias=True, exclude_defaults=True) | {
                    "len_mm": n.length_mm
                }
                for n in g.notches
            ]
            groups.append(entry)
        columns.append({"id": column.id, "groups": groups})
    doc = {"name": a.name, "me_variant": a.me_variant, "columns": columns}
    return json.dumps(doc, indent=2, ensure_ascii=False)


def artifact_from_counts(
    name: str,
    counts: Mapping[str, Sequence[int]],
    me_variant: MeVariant = "me10",
) -> Artifact:
    """Build a geometry-free artifact from notch counts per column."""
    columns = []
    for cid in COLUMN_IDS:
        values = list(counts.get(cid, ()))
        labels = default_labels(cid, len(values))
        columns.append(
            {
                "id": cid,
                "groups": [
                    {"label": label, "notches": [{} for _ in range(n)]}
                    for label, n in zip(labels, values)
                ],
            }
        )
    try:
        return Artifact.model_validate(
            {"name": name, "me_variant": me_variant, "columns": columns}
        )
    except ValidationError as e:
        raise ArtifactValidationError(str(e.errors()[0].get("msg"))) from e


def count_profile(a: Artifact) -> CountProfile:
    """Counts-only view of an artifact."""
    return a.counts()
