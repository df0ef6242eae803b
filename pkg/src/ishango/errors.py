"""Exception hierarchy for the Ishango toolkit."""

from typing import Optional


class IshangoError(Exception):
    """Base class for every error raised by this package."""


class ArtifactParseError(IshangoError):
    """Artifact document is not well-formed."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ) -> None:
        self.path = path
        self.line = line
        self.column = column
        where = path or "<document>"
        if line is not None:
            where = f"{where}:{line}"
            if column is not None:
                where = f"{where}:{column}"
        super().__init__(f"{where}: {message}")


class ArtifactValidationError(IshangoError):
    """Artifact document parsed but violates a model invariant."""

    def __init__(self, message: str, group: Optional[str] = None) -> None:
        self.group = group
        prefix = f"group {group}: " if group else ""
        super().__init__(f"{prefix}{message}")


class SchemaParseError(IshangoError):
    """Schema text does not follow the s/m/L grammar."""

    def __init__(self, message: str, position: int) -> None:
        self.position = position
        super().__init__(f"{message} at position {position}")


class RelationError(IshangoError):
    """Relation refers to labels the artifact does not have."""


class NumeralSystemError(IshangoError):
    """Numeral system definition is malformed or inconsistent."""


class NumeralRangeError(IshangoError):
    """Number is outside what a numeral system can render."""

    def __init__(self, value: int, system: str, low: int, high: int) -> None:
        self.value = value
        self.system = system
        self.min_supported = low
        self.max_supported = high
        super().__init__(
            f"{value} is out of range for {system} "
            f"(supported {low}..{high}, max_supported={high})"
        )


class NumeralParseError(IshangoError):
    """Word sequence is not produced by a numeral system's grammar."""

    def __init__(self, words: str, token: str, system: str) -> None:
        self.words = words
        self.token = token
        self.system = system
        super().__init__(
            f"cannot parse {words!r} in {system}: first unmatched token {token!r}"
        )


class MixedRadixError(IshangoError):
    """Mixed-radix value or digit does not fit the bases."""


class GestureError(IshangoError):
    """Number or gesture outside the phalanx-counting range."""


class NullModelError(IshangoError):
    """Null-model constraints or statistic are unusable."""
