"""Independent re-audit of a completed analysis batch: eight checks.

The validator reads only files: the HAR inputs, the manifest and the
emitted outputs. It shares no in-memory state with the analysis run, so
its conclusions are reproducible from the artifacts alone. Checks run
in a fixed order and the report is deterministic.

Check list:
  1. request counts      re-parse HARs, compare per-site mean request counts
  2. invalid sites       every capture lacking a 200 main document
  3. scoring formulas    recombine reported dimension scores into composites
  4. domain extraction   built-in multi-part-TLD vector + every observed host
  5. CSV/report match    field-by-field CSV versus per-site JSON aggregates
  6. score sanity        Spearman rank correlation (requests, score) < 0
  7. HAR completeness    six capture files per site unless excluded
  8. run consistency     max/min request ratio across a page's runs

Severities: a check fails only on genuine contract violations; expected
statistical artifacts (Jensen effects in averaged clamped scores, small
batches, legitimate run-to-run variation) are warnings with notes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .config import DEFAULT_THRESHOLDS, Thresholds
from .domains import registered_domain
from .har import HarCapture, HarError, load_har_file, provenance_from_filename
from .manifest import Manifest, build_pseudonyms
from .scoring import DEFAULT_WEIGHTS, clamp
from .reporting import SITE_CSV_HEADER, round1

CHECK_NAMES = {
    1: "request_count_verification",
    2: "invalid_site_detection",
    3: "scoring_formula_verification",
    4: "domain_extraction_audit",
    5: "csv_report_consistency",
    6: "score_sanity",
    7: "har_completeness",
    8: "run_to_run_consistency",
}

# Hosts with known registrable domains, exercising multi-part public
# suffixes, wildcard rules, exception rules and IP literals.
DOMAIN_TEST_VECTOR = (
    ("example.com", "example.com"),
    ("www.example.com", "example.com"),
    ("deep.sub.example.org", "example.org"),
    ("www.example.co.uk", "example.co.uk"),
    ("a.b.example.com.au", "example.com.au"),
    ("example.co.jp", "example.co.jp"),
    ("service.gov.uk", "service.gov.uk"),
    ("foo.example.github.io", "example.github.io"),
    ("www.city.kobe.jp", "city.kobe.jp"),
    ("foo.bar.kobe.jp", "foo.bar.kobe.jp"),
    ("192.168.0.1", "192.168.0.1"),
    ("2001:db8::1", "2001:db8::1"),
    ("EXAMPLE.COM.", "example.com"),
)


class MissingOutputs(FileNotFoundError):
    """Raised when the results directory lacks the analysis outputs."""


@dataclass(frozen=True)
class CheckResult:
    check_id: int
    name: str
    status: str  # pass | warn | fail
    details: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "check": self.check_id,
            "name": self.name,
            "status": self.status,
            "details": list(self.details),
        }


class _Details:
    """Collects severities and derives the check status."""

    def __init__(self) -> None:
        self.messages: list[str] = []
        self._failed = False
        self._warned = False

    def fail(self, message: str) -> None:
        self._failed = True
        self.messages.append(message)

    def warn(self, message: str) -> None:
        self._warned = True
        self.messages.append(message)

    def note(self, message: str) -> None:
        self.messages.append(message)

    def result(self, check_id: int) -> CheckResult:
        status = "fail" if self._failed else ("warn" if self._warned else "pass")
        return CheckResult(check_id, CHECK_NAMES[check_id], status, tuple(self.messages))


def _rank(values: list[float]) -> list[float]:
    """Ranks starting at 1, ties carrying the average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def spearman_rho(xs: list[float], ys: list[float]) -> float | None:
    """Spearman rank correlation; None when either series is constant."""
    if len(xs) != len(ys) or len(xs) < 2:
        return None
    rx, ry = _rank(xs), _rank(ys)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    if vx == 0 or vy == 0:
        return None
    return cov / math.sqrt(vx * vy)


# Linear scoring formulas per dimension, as score = clamp(intercept - slope * metric).
_METRIC_FORMULAS = {
    "D1": lambda m, t: 100.0 - m * t.redundant_points_per_excess,
    "D2": lambda m, t: 100.0 - m * t.n_plus_one_points_per_pattern,
    "D3": lambda m, t: 100.0 - m / t.waterfall_ms_per_point,
    "D4": lambda m, t: 100.0 - m,
    "D5": lambda m, t: 100.0 - m * t.oversized_points_per_response,
    "D6": lambda m, t: 100.0 - m / t.compression_kb_per_point,
    "D7": lambda m, t: 100.0 - m,
    "D8": lambda m, t: 100.0 - m * t.error_points_per_percent,
}


@dataclass
class _BatchFiles:
    """Everything the checks read, loaded once."""

    har_files: dict[str, list[Path]]            # site_id -> capture files
    captures: dict[str, list[HarCapture]]       # site_id -> parsed captures
    unparseable: list[str]
    reports: dict[str, dict]                    # site label -> report document
    csv_rows: list[dict[str, str]]
    weights: dict[str, float]
    label_of: dict[str, str]                    # site_id -> output label


def _load_batch(har_dir: Path, results_dir: Path, manifest: Manifest) -> _BatchFiles:
    csv_path = results_dir / "quality_scores.csv"
    sites_dir = results_dir / "sites"
    if not csv_path.is_file() or not sites_dir.is_dir():
        raise MissingOutputs(
            f"{results_dir} lacks quality_scores.csv or sites/; run the analysis first"
        )

    with csv_path.open(encoding="utf-8", newline="") as handle:
        csv_rows = list(csv.DictReader(handle))

    reports = {}
    for path in sorted(sites_dir.glob("*.json")):
        reports[path.stem] = json.loads(path.read_text(encoding="utf-8"))

    weights_path = results_dir / "weights.json"
    if weights_path.is_file():
        weights = json.loads(weights_path.read_text(encoding="utf-8"))
    else:
        weights = dict(DEFAULT_WEIGHTS)

    pseudonyms = build_pseudonyms(manifest)
    label_of = {}
    for record in manifest.included_sites():
        pseudonym = pseudonyms[record.site_id]
        if pseudonym in reports:
            label_of[record.site_id] = pseudonym
        elif record.site_id in reports:
            label_of[record.site_id] = record.site_id

    har_files: dict[str, list[Path]] = {}
    for path in sorted(har_dir.rglob("*.har")):
        site_id, _, _ = provenance_from_filename(path.name)
        har_files.setdefault(site_id, []).append(path)

    captures: dict[str, list[HarCapture]] = {}
    unparseable: list[str] = []
    for record in manifest.included_sites():
        parsed = []
        for path in har_files.get(record.site_id, []):
            try:
                parsed.append(load_har_file(path))
            except HarError as exc:
                unparseable.append(f"{path.name}: {exc}")
        captures[record.site_id] = parsed

    return _BatchFiles(har_files, captures, unparseable, reports, csv_rows, weights, label_of)


def _check_request_counts(batch: _BatchFiles, manifest: Manifest, thresholds: Thresholds) -> CheckResult:
    out = _Details()
    for record in manifest.included_sites():
        label = batch.label_of.get(record.site_id)
        parsed = batch.captures.get(record.site_id, [])
        if label is None:
            if parsed:
                out.fail(f"site with captures has no report file (expected label from manifest entry #{manifest.sites.index(record)})")
            continue
        if not parsed:
            out.fail(f"{label}: report exists but no capture files parse")
            continue
        reparsed_mean = sum(len(c.entries) for c in parsed) / len(parsed)
        reported = batch.reports[label]["aggregate"]["requests_precise"]
        if abs(reparsed_mean - reported) > thresholds.request_count_tolerance:
            out.fail(
                f"{label}: mean request count {reparsed_mean:.2f} from HAR files, "
                f"{reported:.2f} reported"
            )
    for message in batch.unparseable:
        out.note(f"unparseable capture skipped: {message}")
    return out.result(1)


def _main_document(capture: HarCapture):
    for entry in capture.entries:
        if "text/html" in entry.mime_type.lower():
            return entry
    return capture.entries[0] if capture.entries else None


def _check_invalid_sites(batch: _BatchFiles, manifest: Manifest) -> CheckResult:
    out = _Details()
    for record in manifest.included_sites():
        parsed = batch.captures.get(record.site_id, [])
        if not parsed:
            continue
        label = batch.label_of.get(record.site_id, "unreported site")
        docs = [_main_document(c) for c in parsed]
        statuses = [doc.status for doc in docs if doc is not None]
        if statuses and all(status != 200 for status in statuses):
            out.fail(f"{label}: no capture has a 200 main document (statuses {sorted(set(statuses))})")
            continue
        report = batch.reports.get(label)
        if report is None:
            continue
        aggregate = report["aggregate"]
        error_pct = aggregate["dimension_metrics_precise"]["D8"]
        if error_pct == 100.0 and aggregate["requests_precise"] < 10:
            out.warn(
                f"{label}: every API call errored and under 10 requests per capture; "
                "possibly blocked or paywalled"
            )
    return out.result(2)


def _check_scoring(batch: _BatchFiles, thresholds: Thresholds) -> CheckResult:
    out = _Details()
    weights = batch.weights
    csv_scores = {row["site"]: float(row["quality_score"]) for row in batch.csv_rows}
    for label in sorted(batch.reports):
        report = batch.reports[label]
        composites = []
        for block in report["captures"]:
            scores = {dim: block["dimensions"][dim]["score_precise"] for dim in weights}
            recomputed = sum(weights[dim] * clamp(scores[dim]) for dim in weights)
            composites.append(block["composite_precise"])
            if abs(recomputed - block["composite_precise"]) > thresholds.composite_tolerance:
                out.fail(
                    f"{label} {block['page']}/run{block['run']}: composite "
                    f"{block['composite_precise']:.3f} reported, {recomputed:.3f} recomputed"
                )
        if not composites:
            continue
        mean = sum(composites) / len(composites)
        reported_mean = report["aggregate"]["quality_score_precise"]
        if abs(mean - reported_mean) > thresholds.composite_tolerance:
            out.fail(f"{label}: site mean {reported_mean:.3f} reported, {mean:.3f} recomputed")
        if label in csv_scores and abs(csv_scores[label] - mean) > thresholds.composite_tolerance:
            out.fail(f"{label}: CSV quality_score {csv_scores[label]:.1f}, {mean:.3f} recomputed")

        # Cross-check mean scores against the formula applied to mean
        # metrics. Clamped scores averaged over captures legitimately
        # drift from the formula of the averaged metric, so this is a
        # warning with a note, not a failure.
        for dim, formula in _METRIC_FORMULAS.items():
            mean_metric = report["aggregate"]["dimension_metrics_precise"][dim]
            mean_score = report["aggregate"]["dimension_scores_precise"][dim]
            from_metric = clamp(formula(mean_metric, thresholds))
            if abs(from_metric - mean_score) > thresholds.composite_tolerance:
                out.warn(
                    f"{label} {dim}: mean score {mean_score:.2f} vs {from_metric:.2f} from mean "
                    "metric; expected averaging effect of clamped scores, not an error"
                )
    return out.result(3)


def _check_domains(batch: _BatchFiles) -> CheckResult:
    out = _Details()
    for host, expected in DOMAIN_TEST_VECTOR:
        actual = registered_domain(host)
        if actual != expected:
            out.fail(f"vector host {host!r}: expected {expected!r}, got {actual!r}")
    seen: set[str] = set()
    for parsed in batch.captures.values():
        for capture in parsed:
            for entry in capture.entries:
                if entry.host:
                    seen.add(entry.host)
    for host in sorted(seen):
        try:
            domain = registered_domain(host)
        except ValueError as exc:
            out.fail(f"observed host failed extraction: {exc}")
            continue
        normalized = host.lower().rstrip(".")
        if not domain or not (normalized == domain or normalized.endswith("." + domain)):
            out.fail(f"observed host {host!r}: {domain!r} is not a suffix of it")
        elif registered_domain(domain) != domain:
            out.fail(f"observed host {host!r}: extraction is not idempotent")
    out.note(f"vector of {len(DOMAIN_TEST_VECTOR)} known hosts plus {len(seen)} observed hosts checked")
    return out.result(4)


_CSV_FIELD_TO_AGGREGATE = {
    "requests": "requests",
    "api_calls": "api_calls",
    "size_kb": "size_kb",
    "quality_score": "quality_score",
    "redundant_excess": "redundant_excess",
    "missing_cache_pct": "missing_cache_pct",
    "third_party_pct": "third_party_pct",
}


def _check_csv_consistency(batch: _BatchFiles) -> CheckResult:
    out = _Details()
    csv_sites = {row["site"] for row in batch.csv_rows}
    report_sites = set(batch.reports)
    for missing in sorted(csv_sites - report_sites):
        out.fail(f"{missing}: CSV row has no report file")
    for missing in sorted(report_sites - csv_sites):
        out.fail(f"{missing}: report file has no CSV row")
    for row in batch.csv_rows:
        label = row["site"]
        report = batch.reports.get(label)
        if report is None:
            continue
        if row["category"] != report["category"]:
            out.fail(f"{label}: category {row['category']!r} in CSV, {report['category']!r} in report")
        for csv_field, aggregate_field in _CSV_FIELD_TO_AGGREGATE.items():
            csv_value = float(row[csv_field])
            report_value = report["aggregate"][aggregate_field]
            if csv_value != report_value:
                out.fail(
                    f"{label}: {csv_field} is {csv_value} in CSV, {report_value} in report"
                )
            precise = report["aggregate"][f"{aggregate_field}_precise"]
            if round1(precise) != report_value:
                out.fail(
                    f"{label}: {aggregate_field} display {report_value} does not round from "
                    f"its precise value {precise!r}"
                )
    return out.result(5)


def _check_sanity(batch: _BatchFiles) -> CheckResult:
    out = _Details()
    requests = [float(row["requests"]) for row in batch.csv_rows]
    scores = [float(row["quality_score"]) for row in batch.csv_rows]
    if len(requests) < 5:
        out.warn(f"only {len(requests)} sites; too few for a stable rank correlation")
        return out.result(6)
    rho = spearman_rho(requests, scores)
    if rho is None:
        out.warn("request counts or scores are constant; correlation undefined")
    elif rho >= 0:
        out.fail(f"Spearman rho {rho:.3f} between requests and score; expected negative")
    else:
        out.note(f"Spearman rho {rho:.3f}")
    return out.result(6)


def _check_completeness(batch: _BatchFiles, manifest: Manifest, expected: int = 6) -> CheckResult:
    out = _Details()
    for record in manifest.included_sites():
        count = len(batch.har_files.get(record.site_id, []))
        if count != expected:
            label = batch.label_of.get(record.site_id, f"manifest entry #{manifest.sites.index(record)}")
            out.fail(f"{label}: {count} capture files, expected {expected}")
    for record in manifest.sites:
        if record.excluded:
            out.note(f"excluded from completeness: {record.exclusion}")
    return out.result(7)


def _check_run_consistency(batch: _BatchFiles, thresholds: Thresholds) -> CheckResult:
    out = _Details()
    for label in sorted(batch.reports):
        by_page: dict[str, list[int]] = {}
        for block in batch.reports[label]["captures"]:
            by_page.setdefault(block["page"], []).append(block["requests"])
        for page, counts in sorted(by_page.items()):
            low, high = min(counts), max(counts)
            if high == 0:
                continue
            if low == 0 or high / low > thresholds.run_ratio_warn_threshold:
                ratio = "inf" if low == 0 else f"{high / low:.1f}x"
                out.warn(
                    f"{label} {page}: request counts {low}..{high} across runs ({ratio}); "
                    "legitimate dynamic content can do this, flagged for review"
                )
    return out.result(8)


def run_validation(
    har_dir: str | Path,
    results_dir: str | Path,
    manifest: Manifest,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[CheckResult]:
    """Run all eight checks in order and return their results."""
    har_dir = Path(har_dir)
    results_dir = Path(results_dir)
    if not har_dir.is_dir():
        raise MissingOutputs(f"HAR directory {har_dir} does not exist")
    batch = _load_batch(har_dir, results_dir, manifest)
    return [
        _check_request_counts(batch, manifest, thresholds),
        _check_invalid_sites(batch, manifest),
        _check_scoring(batch, thresholds),
        _check_domains(batch),
        _check_csv_consistency(batch),
        _check_sanity(batch),
        _check_completeness(batch, manifest),
        _check_run_consistency(batch, thresholds),
    ]


def validation_report_document(results: list[CheckResult]) -> dict:
    overall = "fail" if any(r.status == "fail" for r in results) else (
        "warn" if any(r.status == "warn" for r in results) else "pass"
    )
    return {
        "overall": overall,
        "checks": [r.to_dict() for r in results],
    }
