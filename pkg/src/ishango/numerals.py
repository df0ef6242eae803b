"""Declarative number-word systems, mixed radices and phalanx counting."""

import json
import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from ishango.config import Settings, get_settings
from ishango.errors import (
    GestureError,
    MixedRadixError,
    NumeralParseError,
    NumeralRangeError,
    NumeralSystemError,
)

DOZEN = 12
PHALANXES = 3
FINGERS = 4
MAX_DOZENS = 4

logger = logging.getLogger(__name__)


class WordEntry(BaseModel):
    """A surface word with optional gloss and uncertainty mark."""

    model_config = ConfigDict(frozen=True)

    word: str = Field(min_length=1, description="Surface form")
    gloss: Optional[str] = Field(default=None, description="Construction gloss")
    uncertain: bool = Field(default=False, description="Form marked with '?'")
    note: Optional[str] = Field(default=None, description="Free text")

    @model_validator(mode="before")
    @classmethod
    def from_string(cls, data: Any) -> Any:
        """Accept a bare string as the word."""
        if isinstance(data, str):
            return {"word": data}
        return data


class Anchor(BaseModel):
    """A value with its own word from which larger numbers are built."""

    model_config = ConfigDict(frozen=True)

    value: int = Field(gt=1, description="Anchor value")
    word: WordEntry = Field(description="Word for the anchor itself")
    combining: Optional[str] = Field(
        default=None, description="Prefix form used when a remainder follows"
    )
    multiples: Dict[int, WordEntry] = Field(
        default_factory=dict, description="Words for k times the anchor"
    )
    joiner: str = Field(default=" ", description="Before a connective form")
    compound_joiner: str = Field(
        default=" ", description="Before a recursively composed remainder"
    )


class NumeralSystem(BaseModel):
    """A number-word grammar: atoms, anchors, connectives and exceptions."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1, description="System name")
    description: str = Field(default="", description="Free text")
    atoms: Dict[int, WordEntry] = Field(
        default_factory=dict, description="Words used as-is"
    )
    connectives: Dict[int, WordEntry] = Field(
        default_factory=dict, description="Dependent forms of small remainders"
    )
    anchors: Tuple[Anchor, ...] = Field(default_factory=tuple)
    exceptions: Dict[int, WordEntry] = Field(
        default_factory=dict, description="Whole-number overrides"
    )
    registers: Dict[str, Dict[int, WordEntry]] = Field(
        default_factory=dict, description="Context-dependent overrides"
    )
    min_supported: int = Field(default=1, ge=1)
    max_supported: int = Field(ge=1)
    attested: Tuple[int, ...] = Field(
        default_factory=tuple, description="Values beyond max_supported"
    )

    @field_validator("anchors")
    @classmethod
    def sort_anchors(cls, v: Tuple[Anchor, ...]) -> Tuple[Anchor, ...]:
        """Anchors ascending by value, without duplicates."""
        values = [a.value for a in v]
        if len(set(values)) != len(values):
            raise ValueError("duplicate anchor value")
        return tuple(sorted(v, key=lambda a: a.value))

    @model_validator(mode="after")
    def validate_system(self) -> "NumeralSystem":
        """Ranges are ordered, tables do not conflict and rendering is total."""
        if self.max_supported < self.min_supported:
            raise ValueError("max_supported must be >= min_supported")
        clash = sorted(set(self.atoms) & set(self.exceptions))
        if clash:
            raise ValueError(f"values {clash} are both atoms and exceptions")
        for register in (None, *self.registers):
            seen: Dict[str, int] = {}
            for n in self.supported_values():
                try:
                    text = _compose(self, n, True, register)[0]
                except NumeralRangeError:
                    raise ValueError(
                        f"cannot render {n} (register {register or 'default'})"
                    ) from None
                if text in seen:
                    raise ValueError(
                        f"{seen[text]} and {n} both render as {text!r}"
                    )
                seen[text] = n
        return self

    def supported_values(self) -> List[int]:
        """Every value to_words accepts."""
        extra = [n for n in self.attested if n > self.max_supported]
        return [*range(self.min_supported, self.max_supported + 1), *sorted(extra)]

    def supports(self, n: int) -> bool:
        """Whether n is in range or attested."""
        return self.min_supported <= n <= self.max_supported or n in self.attested


class NumberWord(BaseModel):
    """A rendered number with its construction gloss."""

    model_config = ConfigDict(frozen=True)

    value: int
    text: str
    gloss: str
    uncertain: bool = False
    register_name: Optional[str] = Field(default=None, serialization_alias="register")
    note: Optional[str] = None


def _entry_for(
    sys: NumeralSystem, n: int, top: bool, register: Optional[str]
) -> Optional[WordEntry]:
    if top:
        if register is not None and n in sys.registers.get(register, {}):
            return sys.registers[register][n]
        if n in sys.exceptions:
            return sys.exceptions[n]
    return sys.atoms.get(n)


def _compose(
    sys: NumeralSystem, n: int, top: bool, register: Optional[str]
) -> Tuple[str, str, bool, Optional[str]]:
    """(text, gloss, uncertain, note) for n."""
    entry = _entry_for(sys, n, top, register)
    if entry is not None:
        return entry.word, entry.gloss or str(n), entry.uncertain, entry.note

    usable = [a for a in sys.anchors if a.value <= n]
    if not usable:
        raise NumeralRangeError(n, sys.name, sys.min_supported, sys.max_supported)
    anchor = usable[-1]
    q, r = divmod(n, anchor.value)
    if q == 1:
        head = anchor.word
        head_gloss = anchor.word.gloss or str(anchor.value)
    elif q in anchor.multiples:
        head = anchor.multiples[q]
        head_gloss = head.gloss or f"{anchor.value}x{q}"
    else:
        raise NumeralRangeError(n, sys.name, sys.min_supported, sys.max_supported)
    if r == 0:
        return head.word, head_gloss, head.uncertain, head.note

    head_text = anchor.combining if (q == 1 and anchor.combining) else head.word
    if r in sys.connectives:
        tail = sys.connectives[r]
        text = f"{head_text}{anchor.joiner}{tail.word}"
        return text, f"{head_gloss}+{r}", head.uncertain or tail.uncertain, None
    rest, rest_gloss, rest_uncertain, _ = _compose(sys, r, False, register)
    text = f"{head_text}{anchor.compound_joiner}{rest}"
    return text, f"{head_gloss}+{rest_gloss}", head.uncertain or rest_uncertain, None


def describe(
    n: int, sys: NumeralSystem, register: Optional[str] = None
) -> NumberWord:
    """
    Render n with its gloss.

    Raises:
        NumeralRangeError: If n is neither in range nor attested
        NumeralSystemError: If the register is unknown
    """
    if register is not None and register not in sys.registers:
        raise NumeralSystemError(f"{sys.name} has no register {register!r}")
    if not sys.supports(n):
        raise NumeralRangeError(n, sys.name, sys.min_supported, sys.max_supported)
    text, gloss, uncertain, note = _compose(sys, n, True, register)
    return NumberWord(
        value=n,
        text=text,
        gloss=gloss,
        uncertain=uncertain,
        register_name=register,
        note=note,
    )


def to_words(n: int, sys: NumeralSystem, register: Optional[str] = None) -> str:
    """Render n as words, e.g. ``to_words(14, yagua) == "nsoava"``."""
    return describe(n, sys, register).text


def _top_words(sys: NumeralSystem) -> Dict[str, int]:
    out = {e.word: n for n, e in sys.exceptions.items()}
    for table in sys.registers.values():
        out.update({e.word: n for n, e in table.items()})
    return out


def _parse(sys: NumeralSystem, text: str, top: bool) -> Optional[int]:
    if top:
        hit = _top_words(sys).get(text)
        if hit is not None:
            return hit
    for n, entry in sys.atoms.items():
        if entry.word == text:
            return n

    registers: Tuple[Optional[str], ...] = (None, *sys.registers) if top else (None,)
    for anchor in reversed(sys.anchors):
        heads: List[Tuple[str, int]] = [(anchor.word.word, 1)]
        if anchor.combining:
            heads.append((anchor.combining, 1))
        heads.extend((e.word, q) for q, e in anchor.multiples.items())
        for head, q in heads:
            if not text.startswith(head):
                continue
            base = anchor.value * q
            rest = text[len(head) :]
            candidates: List[int] = []
            if not rest:
                candidates.append(base)
            if rest.startswith(anchor.joiner):
                tail = rest[len(anchor.joiner) :]
                candidates.extend(
                    base + r for r, e in sys.connectives.items() if e.word == tail
                )
            if rest.startswith(anchor.compound_joiner):
                sub = _parse(sys, rest[len(anchor.compound_joiner) :], False)
                if sub is not None and sub < anchor.value:
                    candidates.append(base + sub)
            for value in candidates:
                for register in registers:
                    try:
                        if _compose(sys, value, top, register)[0] == text:
                            return value
                    except NumeralRangeError:
                        break
    return None


def _vocabulary(sys: NumeralSystem) -> set:
    entries: List[WordEntry] = [
        *sys.atoms.values(),
        *sys.connectives.values(),
        *sys.exceptions.values(),
    ]
    for table in sys.registers.values():
        entries.extend(table.values())
    words = [e.word for e in entries]
    for anchor in sys.anchors:
        words.append(anchor.word.word)
        words.extend(e.word for e in anchor.multiples.values())
        if anchor.combining:
            words.append(anchor.combining)
        words.extend([anchor.joiner, anchor.compound_joiner])
    return {tok for w in words for tok in w.split()}


def from_words(w: Union[str, Sequence[str]], sys: NumeralSystem) -> int:
    """
    Parse a word sequence back to its value.

    Raises:
        NumeralParseError: Naming the first token the grammar cannot use
    """
    text = w if isinstance(w, str) else " ".join(w)
    text = " ".join(text.split())
    value = _parse(sys, text, True) if text else None
    if value is None or not sys.supports(value):
        tokens = text.split() or [""]
        vocab = _vocabulary(sys)
        unknown = [t for t in tokens if t not in vocab]
        raise NumeralParseError(text, (unknown or tokens)[0], sys.name)
    return value


# Mixed radix


class MixedRadixDigits(BaseModel):
    """Digits over per-position bases, most significant first."""

    model_config = ConfigDict(frozen=True)

    digits: Tuple[int, ...] = Field(description="Digits, most significant first")
    bases: Tuple[int, ...] = Field(description="Capacity of each position")

    @model_validator(mode="after")
    def validate_digits(self) -> "MixedRadixDigits":
        """One digit per base, each below its base."""
        if len(self.digits) != len(self.bases):
            raise ValueError("digits and bases differ in length")
        if any(b < 1 for b in self.bases):
            raise ValueError("bases must be positive")
        for d, b in zip(self.digits, self.bases):
            if not 0 <= d < b:
                raise ValueError(f"digit {d} does not fit base {b}")
        return self


def to_mixed_radix(n: int, bases: Sequence[int]) -> MixedRadixDigits:
    """
    Decompose n over bases given most significant first.

    ``to_mixed_radix(59, [5, 12])`` gives digits ``[4, 11]``.

    Raises:
        MixedRadixError: If n is negative or does not fit
    """
    if any(b < 1 for b in bases):
        raise MixedRadixError(f"bases must be positive: {list(bases)}")
    capacity = math.prod(bases)
    if not 0 <= n < capacity:
        raise MixedRadixError(
            f"{n} does not fit bases {list(bases)} (capacity {capacity})"
        )
    digits: List[int] = []
    for b in reversed(bases):
        n, d = divmod(n, b)
        digits.append(d)
    return MixedRadixDigits(digits=tuple(reversed(digits)), bases=tuple(bases))


def from_mixed_radix(
    d: Union[MixedRadixDigits, Sequence[int]], bases: Optional[Sequence[int]] = None
) -> int:
    """Sum of digit times positional weight."""
    if isinstance(d, MixedRadixDigits):
        digits, bases = d.digits, d.bases
    else:
        digits = tuple(d)
        if bases is None:
            raise MixedRadixError("bases are required with raw digits")
    if len(digits) != len(bases):
        raise MixedRadixError("digits and bases differ in length")
    n = 0
    for digit, b in zip(digits, bases):
        if not 0 <= digit < b:
            raise MixedRadixError(f"digit {digit} does not fit base {b}")
        n = n * b + digit
    return n


# Phalanx counting


class PhalanxGesture(BaseModel):
    """Thumb on a phalanx of one hand, completed dozens on the other."""

    model_config = ConfigDict(frozen=True)

    dozens_complete: int = Field(ge=0, le=MAX_DOZENS)
    finger: int = Field(ge=1, le=FINGERS, description="Fore=1 .. little=4")
    phalanx: int = Field(ge=1, le=PHALANXES)

    @property
    def value(self) -> int:
        """The number the gesture shows."""
        return gesture_to_number(self)


def phalanx_gesture(n: int) -> PhalanxGesture:
    """
    Gesture for n in [1, 60].

    Raises:
        GestureError: If n is out of range
    """
    high = (MAX_DOZENS + 1) * DOZEN
    if not 1 <= n <= high:
        raise GestureError(f"{n} is outside 1..{high}")
    d, rest = divmod(n - 1, DOZEN)
    r = rest + 1
    return PhalanxGesture(
        dozens_complete=d,
        finger=math.ceil(r / PHALANXES),
        phalanx=(r - 1) % PHALANXES + 1,
    )


def gesture_to_number(g: PhalanxGesture) -> int:
    """Inverse of phalanx_gesture."""
    return g.dozens_complete * DOZEN + (g.finger - 1) * PHALANXES + g.phalanx


# Loading


def load_system(source: Union[str, Dict[str, Any]]) -> NumeralSystem:
    """
    Load and validate a numeral system definition (JSON text or mapping).

    Raises:
        NumeralSystemError: If the definition is malformed or inconsistent
    """
    try:
        data = json.loads(source) if isinstance(source, str) else source
    except json.JSONDecodeError as e:
        raise NumeralSystemError(f"line {e.lineno}: {e.msg}") from e
    try:
        system = NumeralSystem.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise NumeralSystemError(
            f"{data.get('name', '?') if isinstance(data, dict) else '?'}: "
            f"{first.get('msg', 'invalid')}"
        ) from e
    logger.debug(f"Loaded numeral system {system.name}")
    return system


@lru_cache(maxsize=64)
def _load_path(path: str) -> NumeralSystem:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise NumeralSystemError(f"{path}: {e.strerror or e}") from e
    return load_system(text)


def list_systems(settings: Optional[Settings] = None) -> List[str]:
    """Names of the systems in the data directory."""
    settings = settings or get_settings()
    return sorted(p.stem for p in settings.numerals_dir.glob("*.json"))


def load_bundled_system(
    name: str, settings: Optional[Settings] = None
) -> NumeralSystem:
    """Load a system from the data directory by name."""
    settings = settings or get_settings()
    path = settings.numerals_dir / f"{name}.json"
    if not path.is_file():
        known = ", ".join(list_systems(settings))
        raise NumeralSystemError(f"unknown numeral system {name!r} (known: {known})")
    return _load_path(str(path))


def round_trip_failures(sys: NumeralSystem) -> List[int]:
    """Supported values whose rendering does not parse back, in any register."""
    bad: List[int] = []
    registers: Iterable[Optional[str]] = (None, *sys.registers)
    for register in registers:
        for n in sys.supported_values():
            if from_words(to_words(n, sys, register), sys) != n:
                bad.append(n)
    return bad
