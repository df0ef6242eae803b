"""Schematic rendering of the bone: ASCII columns and standalone SVG."""

import logging
import math
from typing import Dict, Literal, Optional, Tuple

import svgwrite

from ishango.artifact import DEFAULT_PITCH_MM, layout as build_layout, notch_offsets
from ishango.models import Artifact, ColumnId, Layout, NotchGroup
from ishango.schema import classify_notches

RenderMode = Literal["ascii", "svg"]

# Left to right as the bone is usually drawn.
RENDER_ORDER: Tuple[ColumnId, ...] = ("D", "M", "G")

ROW_MM = 2.5
CELL_WIDTH = 28

SCALE_PX_PER_MM = 4.0
COLUMN_WIDTH_MM = 40.0
MARGIN_MM = 10.0
MARK_LENGTH_MM: Dict[Optional[str], float] = {
    "s": 4.0,
    "m": 7.0,
    "L": 10.0,
    None: 6.0,
}
MAX_TILT_DEG = 60.0
FONT_FAMILY = "Arial"
FONT_SIZE_LABEL = 11
FONT_SIZE_TITLE = 14

logger = logging.getLogger(__name__)


def _class_string(group: NotchGroup) -> str:
    classes = classify_notches(group).classes
    return "".join(c or "?" for c in classes)


def _group_label(group: NotchGroup) -> str:
    return f"{group.label}({group.count}) {_class_string(group)}"


def _ascii_column(a: Artifact, cid: ColumnId, lay: Layout) -> Dict[int, str]:
    """Row index to cell text; labels pushed down past earlier blocks."""
    cells: Dict[int, str] = {}
    next_free = 0
    for group in a.column(cid).groups:
        top, bottom = lay.interval(group.label)
        row = max(round(top / ROW_MM), next_free)
        cells[row] = _group_label(group)[: CELL_WIDTH - 1]
        last = max(row, math.ceil(bottom / ROW_MM))
        for r in range(row + 1, last + 1):
            cells[r] = "  |"
        next_free = last + 1
    return cells


def render_ascii(a: Artifact, lay: Layout) -> str:
    """Three text columns D, M, G with one label line per group."""
    columns = {cid: _ascii_column(a, cid, lay) for cid in RENDER_ORDER}
    n_rows = max((max(c, default=-1) + 1 for c in columns.values()), default=0)
    lines = [
        "".join(f"{cid:<{CELL_WIDTH}}" for cid in RENDER_ORDER).rstrip(),
        "".join(f"{'-' * (CELL_WIDTH - 2):<{CELL_WIDTH}}" for _ in RENDER_ORDER),
    ]
    for row in range(n_rows):
        line = "".join(
            f"{columns[cid].get(row, ''):<{CELL_WIDTH}}" for cid in RENDER_ORDER
        )
        lines.append(line.rstrip())
    return "\n".join(lines).rstrip() + "\n"


def _px(mm: float) -> float:
    return round(mm * SCALE_PX_PER_MM, 2)


def render_svg(a: Artifact, lay: Layout, pitch_mm: float = DEFAULT_PITCH_MM) -> str:
    """
    Standalone SVG of the three columns.

    Each notch is a line centred in its column, its length set by the
    notch's length class and tilted by its orientation. Interrupted notches
    are drawn in grey.
    """
    height_mm = lay.height_mm + 2 * MARGIN_MM
    width_mm = len(RENDER_ORDER) * COLUMN_WIDTH_MM + 2 * MARGIN_MM
    dwg = svgwrite.Drawing(size=(_px(width_mm), _px(height_mm)), profile="tiny")

    for i, cid in enumerate(RENDER_ORDER):
        x0 = MARGIN_MM + i * COLUMN_WIDTH_MM
        centre = x0 + COLUMN_WIDTH_MM / 2
        dwg.add(
            dwg.text(
                cid,
                insert=(_px(centre), _px(MARGIN_MM / 2)),
                font_size=FONT_SIZE_TITLE,
                font_family=FONT_FAMILY,
                font_weight="bold",
            )
        )
        for group in a.column(cid).groups:
            top, _ = lay.interval(group.label)
            y0 = MARGIN_MM + top
            classes = classify_notches(group).classes
            offsets = notch_offsets(group, pitch_mm)
            for notch, size, offset in zip(group.notches, classes, offsets):
                half = MARK_LENGTH_MM[size] / 2
                tilt = max(-MAX_TILT_DEG, min(MAX_TILT_DEG, notch.orientation_deg))
                rise = half * math.tan(math.radians(tilt))
                y = y0 + offset
                dwg.add(
                    dwg.line(
                        start=(_px(centre - half), _px(y + rise)),
                        end=(_px(centre + half), _px(y - rise)),
                        stroke="grey" if notch.interrupted else "black",
                        stroke_width=1,
                    )
                )
            dwg.add(
                dwg.text(
                    f"{group.label} ({group.count})",
                    insert=(_px(x0 + 1), _px(y0 + 1)),
                    font_size=FONT_SIZE_LABEL,
                    font_family=FONT_FAMILY,
                )
            )
    return dwg.tostring()


def render_artifact(
    a: Artifact,
    lay: Optional[Layout] = None,
    mode: RenderMode = "ascii",
    pitch_mm: float = DEFAULT_PITCH_MM,
) -> str:
    """
    Render the artifact schematic.

    Args:
        a: The artifact
        lay: Layout to place groups by; built from the artifact when omitted
        mode: "ascii" or "svg"
        pitch_mm: Pitch for groups without measured spacing

    Returns:
        The text document
    """
    lay = lay or build_layout(a, pitch_mm)
    logger.debug(f"Rendering {a.name} as {mode}")
    if mode == "svg":
        return render_svg(a, lay, pitch_mm)
    return render_ascii(a, lay)

