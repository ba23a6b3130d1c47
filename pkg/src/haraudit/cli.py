"""Command-line front end: analyze, validate and score subcommands.

analyze   batch-score a directory of captures against a site manifest
validate  re-audit emitted outputs with the eight independent checks
score     score a single capture and optionally gate on a minimum

Exit status: 0 on success; 1 when analyze parses nothing, when any
validation check fails, or when a gated score falls below the minimum;
2 for unusable arguments or missing inputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import DEFAULT_THRESHOLDS, Thresholds
from .detectors import DIMENSIONS, DIMENSION_NAMES
from .domains import CategoryDictionary
from .har import HarError, load_har_file
from .manifest import ManifestError, load_manifest
from .pipeline import NoInputFiles, run_analysis
from .reporting import write_json
from .scoring import InvalidWeights, load_weights, score_capture
from .validation import MissingOutputs, run_validation, validation_report_document


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haraudit",
        description="Audit HAR captures for API anti-patterns and score their quality.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="score a directory of HAR captures")
    analyze.add_argument("--har-dir", required=True, help="directory of .har capture files")
    analyze.add_argument("--manifest", required=True, help="site manifest JSON file")
    analyze.add_argument("--out", default="out", help="output directory (default: ./out)")
    analyze.add_argument("--anonymize", action="store_true", help="publish pseudonyms, redact URLs")
    analyze.add_argument("--weights", help="weight override JSON file keyed by dimension id")
    analyze.add_argument("--dict", dest="dictionary", help="third-party category dictionary TSV")
    analyze.add_argument("--thresholds", help="threshold override JSON file")
    analyze.add_argument("--jobs", type=int, default=1, help="parallel capture workers")

    validate = sub.add_parser("validate", help="re-audit analysis outputs independently")
    validate.add_argument("--har-dir", required=True, help="directory of .har capture files")
    validate.add_argument("--results", required=True, help="results directory from analyze")
    validate.add_argument("--manifest", required=True, help="site manifest JSON file")
    validate.add_argument("--thresholds", help="threshold override JSON file")

    score = sub.add_parser("score", help="score one capture file")
    score.add_argument("file", help="a single .har capture file")
    score.add_argument("--domain", required=True, help="first-party registrable domain")
    score.add_argument("--min-score", type=float, help="exit nonzero below this composite")
    score.add_argument("--thresholds", help="threshold override JSON file")
    return parser


def _load_thresholds(path: str | None) -> Thresholds:
    return Thresholds.from_file(path) if path else DEFAULT_THRESHOLDS


def _cmd_analyze(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
        weights = load_weights(args.weights) if args.weights else None
        dictionary = CategoryDictionary.from_file(args.dictionary) if args.dictionary else None
        thresholds = _load_thresholds(args.thresholds)
        result = run_analysis(
            args.har_dir,
            manifest,
            args.out,
            anonymize=args.anonymize,
            weights=weights,
            thresholds=thresholds,
            dictionary=dictionary,
            jobs=max(1, args.jobs),
        )
    except (ManifestError, InvalidWeights, NoInputFiles, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for site in result.sites:
        print(
            f"{site.site_id}: score {site.mean_composite:.1f} "
            f"({len(site.captures)} captures, {site.mean_requests:.1f} requests, "
            f"{site.mean_api_calls:.1f} API calls per capture)"
        )
    for name, message in result.parse_errors:
        print(f"parse error: {name}: {message}", file=sys.stderr)
    for message in result.skipped:
        print(f"skipped: {message}", file=sys.stderr)
    print(f"outputs written to {result.output_dir}")
    return 1 if result.all_failed else 0


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
        thresholds = _load_thresholds(args.thresholds)
        results = run_validation(args.har_dir, args.results, manifest, thresholds)
    except (ManifestError, MissingOutputs, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    document = validation_report_document(results)
    write_json(document, Path(args.results) / "validation_report.json")
    for check in results:
        print(f"check {check.check_id} {check.name}: {check.status.upper()}")
        for detail in check.details:
            print(f"  - {detail}")
    print(f"overall: {document['overall'].upper()}")
    return 0 if document["overall"] != "fail" else 1


def _cmd_score(args: argparse.Namespace) -> int:
    try:
        thresholds = _load_thresholds(args.thresholds)
        capture = load_har_file(args.file)
        score = score_capture(capture, args.domain, thresholds=thresholds)
    except (HarError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(f"{capture.provenance}: {score.request_count} requests, {score.api_call_count} API calls")
    for dim in DIMENSIONS:
        result = score.dimensions[dim]
        print(
            f"  {dim} {DIMENSION_NAMES[dim]:24s} score {result.score:6.1f}  "
            f"metric {result.raw_metric:10.1f}  evidence {len(result.evidence)}"
        )
    print(f"composite: {score.composite:.1f}")
    if args.min_score is not None and score.composite < args.min_score:
        print(f"below minimum score {args.min_score:.1f}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "analyze":
        return _cmd_analyze(args)
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_score(args)


if __name__ == "__main__":
    sys.exit(main())
