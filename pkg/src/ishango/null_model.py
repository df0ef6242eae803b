"""Monte-Carlo and exact significance over random count artifacts.

The null distribution is uniform over integer compositions of the total
notch count into the column/group structure, each group within bounds.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, Iterator, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ishango.artifact import artifact_from_counts, load_bundled
from ishango.errors import NullModelError
from ishango.hypotheses import uncovered_penalty
from ishango.models import COLUMN_IDS, Artifact, CountProfile, default_labels
from ishango.relations import SearchConfig

Direction = Literal["ge", "le"]

DEFAULT_GROUPS: Tuple[int, int, int] = (8, 4, 4)
DEFAULT_CHUNK_SIZE = 4096
EXACT_LIMIT = 10**6

logger = logging.getLogger(__name__)


class NullConstraints(BaseModel):
    """Shape and bounds of the random artifacts."""

    model_config = ConfigDict(frozen=True)

    total_notches: int = Field(default=168, ge=0, description="Total notches")
    groups_per_column: Tuple[int, int, int] = Field(
        default=DEFAULT_GROUPS, description="Groups in M, G and D"
    )
    min_group: int = Field(default=1, ge=1, description="Smallest group")
    max_group: int = Field(default=25, ge=1, description="Largest group")

    @model_validator(mode="after")
    def validate_bounds(self) -> "NullConstraints":
        """Bounds are ordered and group counts non-negative."""
        if self.max_group < self.min_group:
            raise ValueError("max_group must be >= min_group")
        if any(n < 0 for n in self.groups_per_column):
            raise ValueError("groups_per_column must be non-negative")
        return self

    @property
    def n_groups(self) -> int:
        """Total number of groups."""
        return sum(self.groups_per_column)

    @property
    def feasible(self) -> bool:
        """Whether any composition satisfies the bounds."""
        k = self.n_groups
        return k * self.min_group <= self.total_notches <= k * self.max_group


class PValueEstimate(BaseModel):
    """Monte-Carlo tail probability with its standard error."""

    model_config = ConfigDict(frozen=True)

    statistic: str = Field(description="Statistic name")
    estimate: float = Field(ge=0.0, le=1.0, description="Fraction of extreme draws")
    n_samples: int = Field(ge=1, description="Number of draws")
    seed: int = Field(description="Root seed")
    stderr: float = Field(ge=0.0, description="sqrt(p(1-p)/n)")
    observed: float = Field(description="Statistic on the reference artifact")
    direction: Direction = Field(description="ge: larger is extreme; le: smaller")
    hits: int = Field(ge=0, description="Number of extreme draws")


class Statistic(BaseModel):
    """A named function of a count profile and its extreme direction."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    func: Callable[[CountProfile], float]
    direction: Direction = "ge"
    description: str = ""

    def extreme(self, value: float, observed: float) -> bool:
        """At least as extreme as the observed value."""
        return value >= observed if self.direction == "ge" else value <= observed


def _equal_gd_sums(p: CountProfile) -> float:
    return float(sum(p.column("G")) == sum(p.column("D")))


def _sums_divisible_12(p: CountProfile) -> float:
    return float(all(sum(p.column(cid)) % 12 == 0 for cid in COLUMN_IDS))


def _slide_rule_cost(p: CountProfile) -> float:
    cfg = SearchConfig()
    m = p.column("M")
    total = 0.0
    for cid in ("G", "D"):
        for target in p.column(cid):  # type: ignore[arg-type]
            best: Optional[float] = None
            for start in range(len(m)):
                for run in range(1, min(cfg.max_run, len(m) - start) + 1):
                    correction = target - sum(m[start : start + run])
                    if abs(correction) > cfg.max_correction_abs:
                        continue
                    cost = (run - 1) + cfg.correction_weight * abs(correction)
                    if best is None or cost < best:
                        best = cost
            total += best if best is not None else uncovered_penalty(cfg)
    return total


STATISTICS: Dict[str, Statistic] = {
    s.name: s
    for s in (
        Statistic(
            name="equal_GD_sums",
            func=_equal_gd_sums,
            description="G and D columns have equal sums",
        ),
        Statistic(
            name="sums_divisible_12",
            func=_sums_divisible_12,
            description="Every column sum is a multiple of 12",
        ),
        Statistic(
            name="slide_rule_coverage_at_cost",
            func=_slide_rule_cost,
            direction="le",
            description="Counts-only simplest slide-rule cover cost",
        ),
    )
}


def get_statistic(statistic: Union[str, Statistic]) -> Statistic:
    """Resolve a statistic by name."""
    if isinstance(statistic, Statistic):
        return statistic
    try:
        return STATISTICS[statistic]
    except KeyError:
        known = ", ".join(sorted(STATISTICS))
        raise NullModelError(
            f"unknown statistic {statistic!r} (known: {known})"
        ) from None


class CompositionSampler:
    """Exact uniform sampler of bounded compositions."""

    def __init__(self, c: NullConstraints):
        if not c.feasible:
            raise NullModelError(
                f"infeasible constraints: {c.n_groups} groups in "
                f"[{c.min_group}, {c.max_group}] cannot sum to {c.total_notches}"
            )
        self.constraints = c
        self.k = c.n_groups
        self.total = c.total_notches
        self.lo = c.min_group
        self.hi = c.max_group

    @cached_property
    def ways(self) -> List[List[int]]:
        """ways[r][t]: compositions of t into r parts within bounds."""
        table = [[0] * (self.total + 1) for _ in range(self.k + 1)]
        table[0][0] = 1
        for r in range(1, self.k + 1):
            prev, row = table[r - 1], table[r]
            for t in range(self.total + 1):
                row[t] = sum(
                    prev[t - v] for v in range(self.lo, min(self.hi, t) + 1)
                )
        return table

    @property
    def count(self) -> int:
        """Number of admissible compositions."""
        return self.ways[self.k][self.total]

    @cached_property
    def cumulative(self) -> List[np.ndarray]:
        # cum[r][t, j]: P(next part <= lo + j | r parts left summing to t)
        width = self.hi - self.lo + 1
        out: List[np.ndarray] = [np.ones((self.total + 1, width))]
        for r in range(1, self.k + 1):
            cum = np.ones((self.total + 1, width))
            for t in range(self.total + 1):
                denom = self.ways[r][t]
                if denom == 0:
                    continue
                probs = [
                    self.ways[r - 1][t - v] / denom if t - v >= 0 else 0.0
                    for v in range(self.lo, self.hi + 1)
                ]
                row = np.cumsum(probs)
                last = max(j for j, q in enumerate(probs) if q > 0)
                row[last:] = 1.0
                cum[t] = row
            out.append(cum)
        return out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` compositions as rows of an integer array."""
        out = np.empty((size, self.k), dtype=np.int64)
        remaining = np.full(size, self.total, dtype=np.int64)
        u = rng.random((size, self.k))
        for i in range(self.k):
            cum = self.cumulative[self.k - i][remaining]
            j = (cum <= u[:, i : i + 1]).sum(axis=1)
            out[:, i] = self.lo + j
            remaining -= out[:, i]
        return out

    def enumerate(self) -> Iterator[Tuple[int, ...]]:
        """Every admissible composition in lexicographic order."""

        def rec(r: int, t: int, prefix: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
            if r == 0:
                if t == 0:
                    yield prefix
                return
            for v in range(self.lo, min(self.hi, t) + 1):
                if self.ways[r - 1][t - v]:
                    yield from rec(r - 1, t - v, prefix + (v,))

        yield from rec(self.k, self.total, ())


def _split(c: NullConstraints, row: Tuple[int, ...]) -> Dict[str, Tuple[int, ...]]:
    out: Dict[str, Tuple[int, ...]] = {}
    start = 0
    for cid, n in zip(COLUMN_IDS, c.groups_per_column):
        out[cid] = tuple(int(x) for x in row[start : start + n])
        start += n
    return out


def _profile_factory(
    c: NullConstraints,
) -> Callable[[Tuple[int, ...]], CountProfile]:
    labels = {
        cid: default_labels(cid, n) for cid, n in zip(COLUMN_IDS, c.groups_per_column)
    }

    def make(row: Tuple[int, ...]) -> CountProfile:
        # rows come from the sampler, so bounds and totals already hold
        return CountProfile.model_construct(
            name="null", counts=_split(c, row), labels=labels
        )

    return make


def sample_null_artifact(rng: np.random.Generator, c: NullConstraints) -> Artifact:
    """One uniform random counts-only artifact."""
    row = CompositionSampler(c).sample(rng, 1)[0]
    return artifact_from_counts("null", _split(c, tuple(row)))


def observed_value(
    statistic: Union[str, Statistic], reference: Optional[CountProfile] = None
) -> float:
    """Statistic on the reference profile (bundled Me10 data by default)."""
    stat = get_statistic(statistic)
    if reference is None:
        reference = load_bundled("me10").counts()
    return stat.func(reference)


def estimate_pvalue(
    statistic: Union[str, Statistic],
    c: Optional[NullConstraints] = None,
    n: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    observed: Optional[float] = None,
    reference: Optional[CountProfile] = None,
) -> PValueEstimate:
    """
    Estimate P(statistic at least as extreme as observed) under the null.

    Draws are split into fixed-size chunks seeded from
    ``SeedSequence(seed).spawn``, so the result does not depend on
    ``workers``.

    Raises:
        NullModelError: Unknown statistic, n < 1 or infeasible constraints
    """
    if n < 1:
        raise NullModelError("n must be at least 1")
    if chunk_size < 1:
        raise NullModelError("chunk_size must be at least 1")
    c = c or NullConstraints()
    stat = get_statistic(statistic)
    obs = observed if observed is not None else observed_value(stat, reference)
    sampler = CompositionSampler(c)
    sampler.cumulative  # built once, shared read-only by the workers
    make = _profile_factory(c)

    n_chunks = math.ceil(n / chunk_size)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk_size, n - i * chunk_size) for i in range(n_chunks)]

    def run_chunk(index: int) -> int:
        rng = np.random.default_rng(children[index])
        rows = sampler.sample(rng, sizes[index])
        return sum(
            1 for row in rows.tolist() if stat.extreme(stat.func(make(row)), obs)
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run_chunk, range(n_chunks)))
    else:
        hits = sum(run_chunk(i) for i in range(n_chunks))

    p = hits / n
    logger.info(
        f"Estimated {stat.name}: {hits}/{n} = {p:.6f} "
        f"(seed {seed}, {n_chunks} chunk(s), {workers} worker(s))"
    )
    return PValueEstimate(
        statistic=stat.name,
        estimate=p,
        n_samples=n,
        seed=seed,
        stderr=math.sqrt(p * (1 - p) / n),
        observed=obs,
        direction=stat.direction,
        hits=hits,
    )


def exact_pvalue_small(
    statistic: Union[str, Statistic],
    c: NullConstraints,
    observed: Optional[float] = None,
    reference: Optional[CountProfile] = None,
    limit: int = EXACT_LIMIT,
) -> Fraction:
    """
    Exact tail probability by exhaustive enumeration.

    Raises:
        NullModelError: If more than ``limit`` compositions exist
    """
    stat = get_statistic(statistic)
    sampler = CompositionSampler(c)
    if sampler.count > limit:
        raise NullModelError(
            f"{sampler.count} compositions exceed the enumeration limit {limit}; "
            "use estimate_pvalue instead"
        )
    obs = observed if observed is not None else observed_value(stat, reference)
    make = _profile_factory(c)
    hits = sum(
        1 for row in sampler.enumerate() if stat.extreme(stat.func(make(row)), obs)
    )
    return Fraction(hits, sampler.count)
