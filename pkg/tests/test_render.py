"""Tests for schematic rendering."""

import xml.etree.ElementTree as ET

import pytest

from ishango.artifact import artifact_from_counts, layout, load_bundled
from ishango.render import render_artifact

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def me10():
    """Bundled artifact with Me = 10."""
    return load_bundled("me10")


def group_blocks(text):
    """Group labels found in an ASCII rendering, top row first."""
    found = []
    for line in text.splitlines()[2:]:
        for token in line.split():
            if "(" in token and token.endswith(")"):
                found.append(token.split("(")[0])
    return found


class TestAsciiRender:
    """Test cases for the ASCII schematic."""

    def test_three_labelled_columns(self, me10):
        """Test the header names D, M and G left to right."""
        text = render_artifact(me10)
        assert text.splitlines()[0].split() == ["D", "M", "G"]

    def test_sixteen_blocks(self, me10):
        """Test every group appears once."""
        blocks = group_blocks(render_artifact(me10))
        assert len(blocks) == 16
        assert set(blocks) == {
            g.label for column in me10.columns for g in column.groups
        }

    def test_classes_in_labels(self, me10):
        """Test group labels carry counts and length classes."""
        text = render_artifact(me10)
        assert "Md(8) LLLssmmm" in text
        assert "Ma(3) mmm" in text

    def test_top_to_bottom(self, me10):
        """Test groups of a column appear in order."""
        blocks = group_blocks(render_artifact(me10))
        m_blocks = [b for b in blocks if b.startswith("M")]
        assert m_blocks == ["Ma", "Mb", "Mc", "Md", "Me", "Mf", "Mg", "Mh"]

    def test_explicit_layout(self, me10):
        """Test an explicit layout gives the same document."""
        assert render_artifact(me10, layout(me10)) == render_artifact(me10)

    def test_empty_columns(self):
        """Test missing groups in a column do not break rendering."""
        a = artifact_from_counts("toy", {"M": [2, 3]})
        text = render_artifact(a)
        assert group_blocks(text) == ["Ma", "Mb"]


class TestSvgRender:
    """Test cases for the SVG schematic."""

    def test_well_formed(self, me10):
        """Test the document parses as XML with an svg root."""
        root = ET.fromstring(render_artifact(me10, mode="svg"))
        assert root.tag == f"{SVG_NS}svg"

    def test_one_line_per_notch(self, me10):
        """Test every notch is drawn."""
        root = ET.fromstring(render_artifact(me10, mode="svg"))
        assert len(list(root.iter(f"{SVG_NS}line"))) == 168

    def test_labels(self, me10):
        """Test column titles and group labels are present."""
        root = ET.fromstring(render_artifact(me10, mode="svg"))
        texts = [t.text for t in root.iter(f"{SVG_NS}text")]
        assert texts[:1] == ["D"]
        assert "Gd (19)" in texts
        assert len(texts) == 3 + 16

    def test_interrupted_notch_grey(self, me10):
        """Test the interrupted Me notch is drawn in grey."""
        root = ET.fromstring(render_artifact(me10, mode="svg"))
        strokes = [line.get("stroke") for line in root.iter(f"{SVG_NS}line")]
        assert strokes.count("grey") == 1

    def test_empty_columns(self):
        """Test a geometry-free artifact renders."""
        a = artifact_from_counts("toy", {"G": [4]})
        root = ET.fromstring(render_artifact(a, mode="svg"))
        assert len(list(root.iter(f"{SVG_NS}line"))) == 4
