"""Command-line front end.

Exit codes: 0 on success, 1 on validation or parse errors, 2 on usage errors.
"""

import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from ishango import __version__
from ishango.artifact import column_sum, load_artifact_file, load_bundled
from ishango.config import Settings, get_settings
from ishango.errors import ArtifactValidationError, IshangoError
from ishango.hypotheses import HypothesisScore, score_all
from ishango.models import COLUMN_IDS, Artifact
from ishango.null_model import (
    STATISTICS,
    NullConstraints,
    estimate_pvalue,
    exact_pvalue_small,
)
from ishango.numerals import (
    describe,
    from_words,
    list_systems,
    load_bundled_system,
    phalanx_gesture,
    to_mixed_radix,
)
from ishango.relations import (
    SearchConfig,
    aligned_cover,
    base12_tally,
    correction_multiset,
    cover_cost,
    enumerate_relations,
    simplest_cover,
    uncovered_targets,
)
from ishango.render import render_artifact
from ishango.schema import (
    classify_notches,
    match_schema,
    matching_schemas,
    parse_schema,
    render_schema,
    subgroup_sizes,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2

Report = Tuple[str, Any]

logger = logging.getLogger(__name__)


def setup_logging(settings: Optional[Settings] = None) -> None:
    """Configure logging for the application."""
    settings = settings or get_settings()
    log_level = getattr(logging, settings.log_level.upper())

    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _load(args: argparse.Namespace, settings: Settings) -> Artifact:
    if args.artifact:
        return load_artifact_file(args.artifact, variant=args.variant)
    return load_bundled(args.variant, settings)


# inspect


def _group_report(a: Artifact, label: str, settings: Settings) -> Dict[str, Any]:
    if not a.has_group(label):
        raise ArtifactValidationError("no such group", group=label)
    group = a.group(label)
    classified = classify_notches(
        group, settings.length_gap_mm, settings.vertical_gap_mm
    )
    return {
        "label": label,
        "count": group.count,
        "classes": "".join(c or "?" for c in classified.classes),
        "uniform": classified.uniform,
        "subgroup_boundaries": list(classified.subgroup_boundaries),
        "subgroup_sizes": subgroup_sizes(classified),
        "matching_schemas": matching_schemas(
            group, settings.length_gap_mm, settings.vertical_gap_mm
        ),
    }


def cmd_inspect(args: argparse.Namespace, settings: Settings) -> Report:
    a = _load(args, settings)
    payload: Dict[str, Any] = {
        "name": a.name,
        "variant": a.me_variant,
        "total_notches": a.total_notches,
        "columns": {
            cid: {
                "groups": {g.label: g.count for g in a.column(cid).groups},
                "sum": column_sum(a, cid),
            }
            for cid in COLUMN_IDS
        },
    }
    lines = [f"{a.name} ({a.me_variant}): {a.total_notches} notches"]
    for cid in COLUMN_IDS:
        col = payload["columns"][cid]
        groups = "  ".join(f"{k}={v}" for k, v in col["groups"].items())
        lines.append(f"{cid}  sum {col['sum']:>3}  {groups}")

    if args.group:
        report = _group_report(a, args.group, settings)
        if args.schema:
            schema = parse_schema(args.schema)
            result = match_schema(
                a.group(args.group),
                schema,
                settings.length_gap_mm,
                settings.vertical_gap_mm,
            )
            report["schema"] = render_schema(schema)
            report["match"] = result.model_dump(mode="json")
        payload["group"] = report
        lines.append("")
        lines.append(
            f"{report['label']} ({report['count']}): {report['classes']}"
            f"  subgroups {report['subgroup_sizes']}"
        )
        for text in report["matching_schemas"]:
            lines.append(f"  matches {text}")
        if "match" in report:
            verdict = "matches" if report["match"]["matched"] else "does not match"
            reason = report["match"]["reason"]
            lines.append(
                f"  {verdict} {report['schema']}" + (f" ({reason})" if reason else "")
            )
    return "\n".join(lines), payload


# relations


def _search_config(args: argparse.Namespace, settings: Settings) -> SearchConfig:
    return SearchConfig(
        max_run=args.max_run,
        max_correction_abs=args.max_correction,
        min_alignment=args.min_alignment,
        pitch_mm=settings.pitch_mm,
    )


def cmd_relations(args: argparse.Namespace, settings: Settings) -> Report:
    a = _load(args, settings)
    cfg = _search_config(args, settings)
    relations = enumerate_relations(a, cfg)
    simple = simplest_cover(relations)
    aligned = aligned_cover(relations)
    tally = base12_tally(aligned.values(), a, reversed_targets=args.reverse or ())

    def rows(items: Sequence[Any]) -> List[Dict[str, Any]]:
        return [
            r.model_dump(mode="json") | {"text": r.describe()} for r in items
        ]

    payload = {
        "variant": a.me_variant,
        "relations": rows(relations),
        "simplest_cover": rows(list(simple.values())),
        "simplest_cover_cost": cover_cost(simple),
        "aligned_cover": rows(list(aligned.values())),
        "aligned_cover_cost": cover_cost(aligned),
        "aligned_corrections": correction_multiset(aligned),
        "uncovered": uncovered_targets(relations, a),
        "tally": tally.model_dump(mode="json") | {"aggregates": tally.aggregates},
    }
    lines = [f"{'target':<8}{'cost':>6}{'align':>8}  relation"]
    for r in relations:
        lines.append(
            f"{r.target:<8}{r.cost:>6.1f}{r.alignment:>8.3f}  {r.describe()}"
        )
    lines.append("")
    lines.append(f"simplest cover (cost {payload['simplest_cover_cost']:.1f}):")
    lines.extend(f"  {r.describe()}" for r in simple.values())
    lines.append(f"aligned cover (cost {payload['aligned_cover_cost']:.1f}):")
    lines.extend(f"  {r.describe()}" for r in aligned.values())
    reversed_note = f" ({', '.join(args.reverse)} reversed)" if args.reverse else ""
    lines.append(
        f"tally{reversed_note}: {' '.join(str(v) for v in tally.aggregates)}"
        f"  multiples of 12: {', '.join(tally.multiples_of_12) or 'none'}"
    )
    if payload["uncovered"]:
        lines.append(f"uncovered: {', '.join(payload['uncovered'])}")
    return "\n".join(lines), payload


# hypotheses


def _score_line(score: HypothesisScore) -> List[str]:
    lines = [f"{score.name:<22}{score.total_cost:>8.3f}"]
    for c in score.components:
        if c.kind == "check":
            mark = "pass" if c.passed else "FAIL"
        elif c.kind == "objection":
            mark = "RAISED" if c.raised else "none"
        else:
            mark = "="
        lines.append(f"    {c.name:<32}{mark:<7}{json.dumps(c.value, default=str)}")
    return lines


def cmd_hypotheses(args: argparse.Namespace, settings: Settings) -> Report:
    a = _load(args, settings)
    scores = score_all(a, SearchConfig(pitch_mm=settings.pitch_mm))
    payload = {
        "variant": a.me_variant,
        "scores": [s.model_dump(mode="json") for s in scores],
    }
    lines = [f"{'hypothesis':<22}{'cost':>8}"]
    for score in scores:
        lines.extend(_score_line(score))
    return "\n".join(lines), payload


# significance


# Statistics are this package's own formalisations; reports say so.
STATISTIC_LABEL = "package-defined statistic"


def _statistic_fields(name: str) -> Dict[str, Any]:
    return {
        "statistic_label": STATISTIC_LABEL,
        "statistic_description": STATISTICS[name].description,
    }


def cmd_significance(args: argparse.Namespace, settings: Settings) -> Report:
    a = _load(args, settings)
    header = (
        f"{args.statistic} ({STATISTIC_LABEL}): "
        f"{STATISTICS[args.statistic].description}"
    )
    reference = a.counts()
    constraints = NullConstraints(
        total_notches=a.total_notches,
        groups_per_column=tuple(  # type: ignore[arg-type]
            len(a.column(cid).groups) for cid in COLUMN_IDS
        ),
        min_group=args.min_group,
        max_group=args.max_group,
    )
    if args.exact:
        p = exact_pvalue_small(args.statistic, constraints, reference=reference)
        payload: Dict[str, Any] = {
            "statistic": args.statistic,
            **_statistic_fields(args.statistic),
            "exact": str(p),
            "estimate": float(p),
        }
        return f"{header}\nexact p = {p} ({float(p):.6f})", payload

    est = estimate_pvalue(
        args.statistic,
        constraints,
        n=args.n,
        seed=args.seed,
        workers=args.workers or settings.null_workers,
        chunk_size=settings.null_chunk_size,
        reference=reference,
    )
    payload = est.model_dump(mode="json") | _statistic_fields(args.statistic)
    text = (
        f"{header}\n"
        f"observed {est.observed:g} ({est.direction})\n"
        f"p = {est.estimate:.6f} +/- {est.stderr:.6f} "
        f"({est.hits}/{est.n_samples}, seed {est.seed})"
    )
    return text, payload


# numerals


def _parse_bases(text: str) -> List[int]:
    try:
        return [int(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid bases {text!r}") from None


def cmd_numerals(args: argparse.Namespace, settings: Settings) -> Report:
    if args.list:
        names = list_systems(settings)
        return "\n".join(names), {"systems": names}

    if args.bases is not None:
        if args.number is None:
            raise argparse.ArgumentError(None, "--bases needs a number")
        digits = to_mixed_radix(args.number, args.bases)
        payload = digits.model_dump(mode="json")
        text = " ".join(str(d) for d in digits.digits)
        return f"{args.number} = [{text}] over {list(digits.bases)}", payload

    if args.gesture:
        if args.number is None:
            raise argparse.ArgumentError(None, "--gesture needs a number")
        g = phalanx_gesture(args.number)
        payload = g.model_dump(mode="json") | {"value": args.number}
        text = (
            f"{args.number}: {g.dozens_complete} dozen(s) complete, "
            f"finger {g.finger}, phalanx {g.phalanx}"
        )
        return text, payload

    if not args.system:
        raise argparse.ArgumentError(None, "--system is required")
    system = load_bundled_system(args.system, settings)

    if args.parse is not None:
        value = from_words(args.parse, system)
        return str(value), {"system": system.name, "words": args.parse, "value": value}

    numbers = (
        [args.number] if args.number is not None else system.supported_values()
    )
    words = [describe(n, system, args.register) for n in numbers]
    payload = {
        "system": system.name,
        "words": [w.model_dump(mode="json", by_alias=True) for w in words],
    }
    if args.number is not None:
        w = words[0]
        return w.text, payload
    lines = [
        f"{w.value:>6}  {w.text:<28}{w.gloss}{' (?)' if w.uncertain else ''}"
        for w in words
    ]
    return "\n".join(lines), payload


# render


def cmd_render(args: argparse.Namespace, settings: Settings) -> Report:
    a = _load(args, settings)
    document = render_artifact(a, mode=args.mode, pitch_mm=settings.pitch_mm)
    return document.rstrip("\n"), {"mode": args.mode, "document": document}


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], Report]] = {
    "inspect": cmd_inspect,
    "relations": cmd_relations,
    "hypotheses": cmd_hypotheses,
    "significance": cmd_significance,
    "numerals": cmd_numerals,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = argparse.ArgumentParser(
        prog="ishango",
        description="Analyse the Ishango bone notch data and related numerals.",
    )
    parser.add_argument("--version", action="version", version=__version__)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        choices=["text", "json"],
        default="text",
        help="Output format.",
    )

    with_artifact = argparse.ArgumentParser(add_help=False, parents=[common])
    with_artifact.add_argument(
        "artifact",
        nargs="?",
        help="Artifact document; the bundled data when omitted.",
    )
    with_artifact.add_argument(
        "--variant",
        choices=["me9", "me10"],
        help="Count the interrupted Me notch (me10) or not (me9).",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    inspect = subparsers.add_parser(
        "inspect", parents=[with_artifact], help="Show group counts and sums."
    )
    inspect.add_argument("--group", help="Classify one group, e.g. Md.")
    inspect.add_argument("--schema", help="Match --group against a schema.")

    relations = subparsers.add_parser(
        "relations", parents=[with_artifact], help="Run the relation search."
    )
    relations.add_argument("--max-correction", type=int, default=2)
    relations.add_argument("--max-run", type=int, default=3)
    relations.add_argument("--min-alignment", type=float, default=0.0)
    relations.add_argument(
        "--reverse",
        action="append",
        metavar="TARGET",
        help="Lay this target's operands in reverse order in the tally.",
    )

    subparsers.add_parser(
        "hypotheses", parents=[with_artifact], help="Compare all hypotheses."
    )

    significance = subparsers.add_parser(
        "significance", parents=[with_artifact], help="Null-model p-value."
    )
    significance.add_argument(
        "--statistic", choices=sorted(STATISTICS), default="equal_GD_sums"
    )
    significance.add_argument("--n", type=int, default=10_000)
    significance.add_argument("--seed", type=int, default=0)
    significance.add_argument("--workers", type=int, default=None)
    significance.add_argument("--min-group", type=int, default=1)
    significance.add_argument("--max-group", type=int, default=25)
    significance.add_argument(
        "--exact", action="store_true", help="Enumerate instead of sampling."
    )

    numerals = subparsers.add_parser(
        "numerals", parents=[common], help="Convert numbers and number words."
    )
    numerals.add_argument("number", nargs="?", type=int)
    numerals.add_argument("--system", help="Numeral system name.")
    numerals.add_argument("--parse", help="Words to convert to a number.")
    numerals.add_argument("--register", help="Register, e.g. cattle.")
    numerals.add_argument("--list", action="store_true", help="List systems.")
    numerals.add_argument(
        "--bases", type=_parse_bases, help="Mixed-radix bases, e.g. 5,12."
    )
    numerals.add_argument(
        "--gesture", action="store_true", help="Phalanx counting gesture."
    )

    render = subparsers.add_parser(
        "render", parents=[with_artifact], help="Draw the bone schematic."
    )
    render.add_argument("--mode", choices=["ascii", "svg"], default="ascii")

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        settings = get_settings()
        setup_logging(settings)
        text, payload = COMMANDS[args.command](args, settings)
    except argparse.ArgumentError as e:
        print(f"ishango {args.command}: error: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except (IshangoError, ValidationError) as e:
        logger.debug(f"{args.command} failed: {e!r}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    if args.format == "json":
        print(json.dumps(payload, indent=2, ensure_ascii=False, default=str))
    else:
        print(text)
    return EXIT_OK


def main() -> None:
    """Entry point for the console script."""
    sys.exit(run())
