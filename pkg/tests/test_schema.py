"""Tests for s/m/L schema parsing, classification and matching."""

import pytest

from ishango.artifact import load_bundled
from ishango.errors import SchemaParseError
from ishango.models import Notch, NotchGroup
from ishango.schema import (
    Schema,
    SchemaLeaf,
    classify_notches,
    match_schema,
    matching_schemas,
    parse_schema,
    render_schema,
    schema_boundaries,
    schema_leaf_total,
    subgroup_sizes,
)

QUOTED_SCHEMAS = [
    "3s",
    "1m+3s+1m+1L",
    "4L",
    "3L+2s+3m",
    "3m+2s+3m+1L",
    "8m+2L(?)",
    "3m(?)+2L",
    "1m+1L+3m",
    "3m+4L",
    "(2m+1L+2m+1L)+4L+1L",
    "2m+((7L)+(3L+2m)+(1s+3m+1s))",
]


@pytest.fixture(scope="module")
def me10():
    """Bundled artifact with Me = 10."""
    return load_bundled("me10")


@pytest.fixture(scope="module")
def me9():
    """Bundled artifact with Me = 9."""
    return load_bundled("me9")


def _classes(group):
    return "".join(c or "?" for c in classify_notches(group).classes)


def _scaled(group, factor):
    notches = tuple(
        n.model_copy(
            update={"length_mm": None if n.length_mm is None else n.length_mm * factor}
        )
        for n in group.notches
    )
    gaps = group.intra_gaps_mm
    return group.model_copy(
        update={
            "notches": notches,
            "intra_gaps_mm": None if gaps is None else tuple(g * factor for g in gaps),
        }
    )


def _lengths_group(lengths, label="Mx", intra=None):
    return NotchGroup(
        label=label,
        notches=[Notch(length_mm=x) for x in lengths],
        intra_gaps_mm=intra,
    )


class TestParseSchema:
    """Test cases for the schema grammar."""

    def test_flat_schema(self):
        """Test a flat sum of leaves."""
        schema = parse_schema("3L+2s+3m")
        assert schema.terms == (
            SchemaLeaf(count=3, size_class="L"),
            SchemaLeaf(count=2, size_class="s"),
            SchemaLeaf(count=3, size_class="m"),
        )
        assert schema_leaf_total(schema) == 8

    def test_nested_schema(self):
        """Test parenthesised sub-schemas nest."""
        schema = parse_schema("2m+((7L)+(3L+2m)+(1s+3m+1s))")
        assert schema.leaf_total == 19
        assert isinstance(schema.terms[1], Schema)
        assert len(schema.terms[1].terms) == 3

    def test_uncertain_mark(self):
        """Test the (?) mark sets the uncertain flag."""
        schema = parse_schema("8m+2L(?)")
        assert schema.leaves[1].uncertain is True
        assert schema.leaves[0].uncertain is False

    def test_whitespace_ignored(self):
        """Test whitespace between tokens is ignored."""
        assert parse_schema(" 3m + 4L ") == parse_schema("3m+4L")

    @pytest.mark.parametrize("text", QUOTED_SCHEMAS)
    def test_round_trip(self, text):
        """Test quoted schemas reparse from their canonical form."""
        schema = parse_schema(text)
        assert render_schema(schema) == text
        assert parse_schema(render_schema(schema)) == schema

    def test_unbalanced_parentheses(self):
        """Test a missing closing parenthesis is reported with its position."""
        with pytest.raises(SchemaParseError) as exc_info:
            parse_schema("(3m+4L")
        assert exc_info.value.position == 6

    def test_unknown_letter(self):
        """Test an unknown class letter is rejected."""
        with pytest.raises(SchemaParseError, match="unknown class letter"):
            parse_schema("3x")

    def test_zero_count(self):
        """Test a zero count is rejected at its position."""
        with pytest.raises(SchemaParseError) as exc_info:
            parse_schema("3m+0L")
        assert exc_info.value.position == 3

    def test_trailing_garbage(self):
        """Test trailing characters are rejected."""
        with pytest.raises(SchemaParseError, match="unexpected"):
            parse_schema("3m)")

    def test_empty(self):
        """Test empty text is rejected."""
        with pytest.raises(SchemaParseError):
            parse_schema("")

    @pytest.mark.parametrize("text", ["\u00b2s", "3\u00b2s", "\u0663m", "\uff13L"])
    def test_non_ascii_digits(self, text):
        """Test digits outside 0-9 are parse errors, not int() failures."""
        with pytest.raises(SchemaParseError):
            parse_schema(text)


class TestSchemaBoundaries:
    """Test cases for parenthesis boundaries."""

    def test_flat_has_none(self):
        """Test a flat schema has no boundaries."""
        assert schema_boundaries(parse_schema("3L+2s+3m")) == set()

    def test_nested_boundaries(self):
        """Test boundaries of the Gd reading."""
        schema = parse_schema("2m+((7L)+(3L+2m)+(1s+3m+1s))")
        assert schema_boundaries(schema) == {2, 9, 14}

    def test_leading_group(self):
        """Test the Ga reading has one interior boundary."""
        assert schema_boundaries(parse_schema("(2m+1L+2m+1L)+4L+1L")) == {6}


class TestClassifyNotches:
    """Test cases for length classification."""

    def test_three_clusters(self, me10):
        """Test Mb and Md split into s, m and L."""
        assert _classes(me10.group("Mb")) == "msssmL"
        assert _classes(me10.group("Md")) == "LLLssmmm"

    def test_two_clusters(self, me10):
        """Test Mh splits into two classes."""
        assert _classes(me10.group("Mh")) == "sssLLLL"
        assert _classes(me10.group("Mg")) == "sLsss"

    def test_uniform_groups(self, me10):
        """Test groups without a length gap are uniform m."""
        for label in ("Ma", "Mc"):
            classified = classify_notches(me10.group(label))
            assert classified.uniform is True
            assert set(classified.classes) == {"m"}

    def test_widest_gaps_kept(self, me10):
        """Test Mf keeps the two widest of three length gaps."""
        assert _classes(me10.group("Mf")) == "smmLL"

    def test_me_variants(self, me9, me10):
        """Test the interrupted short notch forms its own class in Me10."""
        assert _classes(me10.group("Me")) == "mmmmmmmmLs"
        assert _classes(me9.group("Me")) == "ssssssssL"

    def test_unknown_lengths(self, me10):
        """Test unknown lengths stay unclassified."""
        classified = classify_notches(me10.group("Dd"))
        assert classified.classes[:2] == ("m", "m")
        assert all(c is None for c in classified.classes[2:])

    def test_subgroup_boundaries(self, me10):
        """Test spacing gaps of at least 3 mm split subgroups."""
        assert classify_notches(me10.group("Mb")).subgroup_boundaries == (1, 4, 5)
        assert classify_notches(me10.group("Md")).subgroup_boundaries == (3, 5)
        assert classify_notches(me10.group("Gd")).subgroup_boundaries == (2, 9, 14)

    def test_subgroup_sizes(self, me10):
        """Test Mh splits 3 + 4."""
        assert subgroup_sizes(classify_notches(me10.group("Mh"))) == [3, 4]

    def test_no_spacing_no_boundaries(self, me10):
        """Test groups without spacing data have no subgroups."""
        classified = classify_notches(me10.group("Ma"))
        assert classified.subgroup_boundaries == ()
        assert subgroup_sizes(classified) == [3]

    @pytest.mark.parametrize("factor", [0.1, 0.3, 0.5, 1.1, 1.3, 2.0, 3.7, 10.0])
    def test_scale_invariant(self, me9, me10, factor):
        """Test scaling lengths, spacing and thresholds together keeps classes."""
        for a in (me9, me10):
            for group in a.column("M").groups:
                base = classify_notches(group)
                scaled = classify_notches(
                    _scaled(group, factor),
                    gap_len_mm=2.0 * factor,
                    gap_vert_mm=3.0 * factor,
                )
                assert scaled.classes == base.classes, group.label
                assert scaled.subgroup_boundaries == base.subgroup_boundaries

    def test_thresholds(self):
        """Test a wider length threshold merges clusters."""
        group = _lengths_group([5.0, 8.0, 11.0])
        assert _classes(group) == "smL"
        wide = classify_notches(group, gap_len_mm=4.0)
        assert wide.uniform is True


class TestMatchSchema:
    """Test cases for schema matching."""

    @pytest.mark.parametrize(
        "label,text",
        [
            ("Ma", "3s"),
            ("Mb", "1m+3s+1m+1L"),
            ("Mc", "4L"),
            ("Md", "3L+2s+3m"),
            ("Mh", "3m+4L"),
            ("Mg", "1m+1L+3m"),
            ("Mf", "3m(?)+2L"),
            ("Ga", "(2m+1L+2m+1L)+4L+1L"),
            ("Gd", "2m+((7L)+(3L+2m)+(1s+3m+1s))"),
            ("Dd", "2s+(1L+1m+3L+1m+1L)"),
        ],
    )
    def test_quoted_readings_match(self, me10, label, text):
        """Test every quoted reading matches its group."""
        result = match_schema(me10.group(label), parse_schema(text))
        assert result.matched, result.reason

    def test_count_mismatch(self, me10):
        """Test a schema with the wrong total fails."""
        result = match_schema(me10.group("Md"), parse_schema("3L+2s+2m"))
        assert not result.matched
        assert "7 notches" in result.reason

    def test_class_mismatch(self, me10):
        """Test a reading with the wrong classes fails."""
        result = match_schema(me10.group("Md"), parse_schema("3s+2L+3m"))
        assert not result.matched
        assert result.reason == "length classes differ"

    def test_boundary_mismatch(self, me10):
        """Test parentheses need a spacing gap at each boundary."""
        result = match_schema(me10.group("Md"), parse_schema("(2L)+1L+2s+3m"))
        assert not result.matched
        assert "[2]" in result.reason

    def test_leaf_spans(self, me10):
        """Test spans cover the group leaf by leaf."""
        result = match_schema(me10.group("Md"), parse_schema("3L+2s+3m"))
        assert result.leaf_spans == ((0, 3), (3, 5), (5, 8))
        assert result.class_map == {"L": "L", "s": "s", "m": "m"}

    def test_me10_readings(self, me10):
        """Test which stored Me readings fit ten notches."""
        assert matching_schemas(me10.group("Me")) == [
            "4m+4m+2L(?)",
            "8m+2L(?)",
            "4m+4m+1L+1L(?)",
            "8m+1L+1L(?)",
        ]

    def test_me9_readings(self, me9):
        """Test which stored Me readings fit nine notches."""
        assert matching_schemas(me9.group("Me")) == ["4m+4m+1L", "8m+1L"]

    def test_mg_alternatives(self, me10):
        """Test all three Mg alternatives fit."""
        assert matching_schemas(me10.group("Mg")) == [
            "1m+1L+3m",
            "2L(?)+3m",
            "1m+4L(?)",
        ]
