"""Ishango bone notch analysis and numeral systems."""

__version__ = "0.1.0"
__all__ = [
    "Artifact",
    "NumeralSystem",
    "Relation",
    "Settings",
    "load_bundled",
    "load_bundled_system",
]

from ishango.artifact import load_bundled
from ishango.config import Settings
from ishango.models import Artifact
from ishango.numerals import NumeralSystem, load_bundled_system
from ishango.relations import Relation
