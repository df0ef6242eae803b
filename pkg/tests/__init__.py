"""Test package initialization."""

from ishango import Artifact, NumeralSystem, Relation, Settings, load_bundled


def test_version():
    """Test version is defined."""
    from ishango import __version__

    assert __version__ == "0.1.0"


def test_exports():
    """Test that main classes are exported."""
    assert Artifact is not None
    assert NumeralSystem is not None
    assert Relation is not None
    assert Settings is not None
    assert callable(load_bundled)
