"""Tests for the slide-rule relation search."""

import itertools
import random

import pytest

from ishango.artifact import artifact_from_counts, layout, load_bundled
from ishango.errors import RelationError
from ishango.models import CountProfile
from ishango.relations import (
    Relation,
    SearchConfig,
    aligned_cover,
    alignment_score,
    base12_tally,
    correction_multiset,
    cover_cost,
    enumerate_relations,
    relation_cost,
    simplest_cover,
    uncovered_targets,
    verify_relation,
)


@pytest.fixture(scope="module")
def me9():
    """Bundled artifact with Me = 9."""
    return load_bundled("me9")


@pytest.fixture(scope="module")
def me10():
    """Bundled artifact with Me = 10."""
    return load_bundled("me10")


@pytest.fixture(scope="module")
def me10_relations(me10):
    """Default search on Me10."""
    return enumerate_relations(me10)


def _key(r):
    return (r.target, r.operands, r.correction)


def _brute_force(profile, cfg, intervals=None):
    """Every (target, consecutive run, correction) by exhaustive enumeration."""
    m_labels = profile.labels["M"]
    found = set()
    for cid in ("G", "D"):
        for target, count in zip(profile.labels[cid], profile.counts[cid]):
            for i, j in itertools.combinations(range(len(m_labels) + 1), 2):
                if j - i > cfg.max_run:
                    continue
                labels = m_labels[i:j]
                correction = count - sum(profile.count_of(x) for x in labels)
                if abs(correction) > cfg.max_correction_abs:
                    continue
                if intervals is not None:
                    top, bottom = intervals[target]
                    overlap = sum(
                        max(0.0, min(bottom, hi) - max(top, lo))
                        for lo, hi in (intervals[x] for x in labels)
                    )
                    if overlap <= 0:
                        continue
                found.add((target, tuple(labels), correction))
    return found


class TestRelationModel:
    """Test cases for Relation and its cost."""

    def test_cost(self):
        """Test cost is run length - 1 plus weighted correction."""
        r = Relation(target="Db", operands=("Mc", "Md", "Me"), correction=-1)
        assert relation_cost(r) == 4.0
        assert relation_cost(r, SearchConfig(correction_weight=1.0)) == 3.0
        assert r.run_length == 3

    def test_describe(self, me10_relations):
        """Test the human-readable form."""
        db = [r for r in me10_relations if r.operands == ("Mc", "Md", "Me")]
        db = [r for r in db if r.target == "Db"][0]
        assert db.describe() == "4 + 8 + 10 -1 ==> 21 (Db)"

    def test_operands_required(self):
        """Test a relation needs at least one operand."""
        with pytest.raises(ValueError):
            Relation(target="Ga", operands=())

    @pytest.mark.parametrize("weight", [0.0, 0.5, 1.0, 2.0])
    def test_cost_monotone(self, weight):
        """Test cost never falls as |correction| or run length grows."""
        cfg = SearchConfig(correction_weight=weight, max_run=8)
        labels = ("Ma", "Mb", "Mc", "Md", "Me", "Mf", "Mg", "Mh")
        for run in range(1, 9):
            for correction in range(-5, 6):
                r = Relation(
                    target="Gd", operands=labels[:run], correction=correction
                )
                wider = Relation(
                    target="Gd",
                    operands=labels[:run],
                    correction=correction + (1 if correction >= 0 else -1),
                )
                assert relation_cost(wider, cfg) >= relation_cost(r, cfg)
                if run < 8:
                    longer = Relation(
                        target="Gd", operands=labels[: run + 1], correction=correction
                    )
                    assert relation_cost(longer, cfg) == relation_cost(r, cfg) + 1


class TestAlignment:
    """Test cases for vertical alignment."""

    def test_partial_overlap(self, me10):
        """Test Db against Mc and Md."""
        r = Relation(target="Db", operands=("Mc", "Md"))
        assert alignment_score(r, layout(me10)) == pytest.approx(0.5875)

    def test_no_overlap(self, me10):
        """Test a far away run has zero alignment."""
        r = Relation(target="Dd", operands=("Ma",))
        assert alignment_score(r, layout(me10)) == 0.0

    def test_unknown_label(self, me10):
        """Test unknown labels raise RelationError."""
        with pytest.raises(RelationError):
            alignment_score(Relation(target="Gz", operands=("Ma",)), layout(me10))


class TestEnumerateRelations:
    """Test cases for the ranked search."""

    def test_exact_sums_me9(self, me9):
        """Test the uncorrected Me9 relations in rank order."""
        relations = enumerate_relations(me9, SearchConfig(max_correction_abs=0))
        assert [(r.target, r.operands, r.cost) for r in relations] == [
            ("Gc", ("Md", "Me"), 1.0),
            ("Gb", ("Ma", "Mb", "Mc"), 2.0),
            ("Db", ("Mc", "Md", "Me"), 2.0),
            ("Dc", ("Me", "Mf", "Mg"), 2.0),
            ("Gd", ("Me", "Mf", "Mg"), 2.0),
        ]
        middle = {
            (r.target_count, r.operand_counts)
            for r in relations
            if r.target in ("Gb", "Gc", "Gd", "Db")
        }
        assert middle == {
            (13, (3, 6, 4)),
            (21, (4, 8, 9)),
            (17, (8, 9)),
            (19, (9, 5, 5)),
        }

    def test_uncovered_me9(self, me9):
        """Test targets without an exact consecutive sum."""
        relations = enumerate_relations(me9, SearchConfig(max_correction_abs=0))
        assert uncovered_targets(relations, me9) == ["Ga", "Da", "Dd"]

    def test_sorted_by_cost(self, me10_relations):
        """Test the ranking is by ascending cost."""
        costs = [r.cost for r in me10_relations]
        assert costs == sorted(costs)

    def test_all_verify(self, me10, me10_relations):
        """Test every found relation holds."""
        assert all(verify_relation(r, me10) for r in me10_relations)
        assert all(0 < r.alignment <= 1 for r in me10_relations)

    def test_min_alignment(self, me10):
        """Test the alignment threshold filters relations."""
        relations = enumerate_relations(me10, SearchConfig(min_alignment=0.5))
        assert relations
        assert all(r.alignment >= 0.5 for r in relations)

    def test_counts_only_skips_alignment(self, me9):
        """Test counts-only input reports alignment 1.0 and finds Dd."""
        relations = enumerate_relations(
            me9.counts(), SearchConfig(max_correction_abs=0)
        )
        assert all(r.alignment == 1.0 for r in relations)
        assert ("Dd", ("Me",), 0) in {_key(r) for r in relations}

    def test_brute_force_bundled(self, me10):
        """Test the search equals exhaustive enumeration on the bundled data."""
        cfg = SearchConfig()
        expected = _brute_force(me10.counts(), cfg, layout(me10).intervals)
        assert {_key(r) for r in enumerate_relations(me10, cfg)} == expected

    def test_brute_force_random_toys(self):
        """Test the search equals exhaustive enumeration on random toys."""
        rng = random.Random(7)
        for _ in range(50):
            counts = {
                cid: [rng.randint(1, 12) for _ in range(rng.randint(0, 3))]
                for cid in ("G", "D")
            }
            counts["M"] = [rng.randint(1, 9) for _ in range(rng.randint(1, 8))]
            profile = CountProfile(counts=counts)
            cfg = SearchConfig(
                max_run=rng.randint(1, 3), max_correction_abs=rng.randint(0, 2)
            )
            found = {_key(r) for r in enumerate_relations(profile, cfg)}
            assert found == _brute_force(profile, cfg)

    def test_geometry_free_artifact(self):
        """Test a geometry-free artifact is still searched with its layout."""
        a = artifact_from_counts("toy", {"M": [2, 3], "G": [5]})
        relations = enumerate_relations(a, SearchConfig(max_correction_abs=0))
        assert [_key(r) for r in relations] == [("Ga", ("Ma", "Mb"), 0)]


class TestVerifyRelation:
    """Test cases for verify_relation."""

    def test_true_and_false(self, me10):
        """Test a holding and a failing relation."""
        assert verify_relation(
            Relation(target="Gc", operands=("Md", "Me"), correction=-1), me10
        )
        assert not verify_relation(Relation(target="Gc", operands=("Md", "Me")), me10)

    def test_unknown_label(self, me10):
        """Test unknown labels raise RelationError."""
        with pytest.raises(RelationError, match="unknown"):
            verify_relation(Relation(target="Gz", operands=("Ma",)), me10)

    def test_non_consecutive(self, me10):
        """Test operands must be a consecutive run."""
        with pytest.raises(RelationError, match="consecutive"):
            verify_relation(Relation(target="Gb", operands=("Ma", "Mc")), me10)

    def test_operands_from_m_column(self, me10):
        """Test operands must come from the M column."""
        with pytest.raises(RelationError):
            verify_relation(Relation(target="Gb", operands=("Ga",)), me10)


class TestCovers:
    """Test cases for the covering selections."""

    def test_simplest_cover_me9(self, me9):
        """Test the simplest Me9 cover."""
        cover = simplest_cover(enumerate_relations(me9))
        assert list(cover) == ["Ga", "Gb", "Gc", "Gd", "Da", "Db", "Dc", "Dd"]
        assert cover_cost(cover) == 19.0
        assert cover["Gc"].operands == ("Md", "Me")
        assert cover["Dd"].operands == ("Mh",)
        assert cover["Dd"].correction == 2

    def test_simplest_cover_me10(self, me10_relations):
        """Test the simplest Me10 cover is costlier than Me9's."""
        cover = simplest_cover(me10_relations)
        assert cover_cost(cover) == 26.0
        assert cover["Dc"].operands == ("Md", "Me")
        assert cover["Dc"].correction == 1

    def test_aligned_cover_me10(self, me10_relations):
        """Test the best-aligned Me10 cover."""
        cover = aligned_cover(me10_relations)
        assert {t: (r.operands, r.correction) for t, r in cover.items()} == {
            "Da": (("Ma", "Mb"), 2),
            "Ga": (("Mb", "Mc"), 1),
            "Gb": (("Mc", "Md"), 1),
            "Db": (("Mc", "Md", "Me"), -1),
            "Gc": (("Md", "Me"), -1),
            "Dc": (("Me", "Mf", "Mg"), -1),
            "Gd": (("Mf", "Mg", "Mh"), 2),
            "Dd": (("Mh",), 2),
        }
        assert cover_cost(cover) == 32.0
        assert correction_multiset(cover) == [2, 2, 2, 1, 1, -1, -1, -1]


class TestBase12Tally:
    """Test cases for the slot aggregation."""

    def test_unreversed(self, me10, me10_relations):
        """Test aggregates with operands in M order."""
        tally = base12_tally(aligned_cover(me10_relations).values(), me10)
        assert tally.aggregates == [3, 12, 12, 24, 30, 10, 10, 14]

    def test_reversed_gd(self, me10, me10_relations):
        """Test reading Gd as 7 + 5 + 5."""
        tally = base12_tally(
            aligned_cover(me10_relations).values(), me10, reversed_targets=("Gd",)
        )
        assert tally.aggregates == [3, 12, 12, 24, 30, 12, 10, 12]
        assert tally.multiples_of_12 == ("Mb", "Mc", "Md", "Mf", "Mh")
        assert tally.corrections_by_value == {2: 6, 1: 2, -1: -3}
        assert tally.corrections_total == 5

    def test_empty(self, me10):
        """Test an empty relation set leaves every slot at zero."""
        tally = base12_tally([], me10)
        assert set(tally.aggregates) == {0}
        assert tally.multiples_of_12 == ()
        assert tally.corrections_total == 0
