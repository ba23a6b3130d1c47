"""Published outputs: score CSVs, per-site reports, anonymization.

Display values round to one decimal place. The CSV and the per-site
report render every shared figure through the same rounding of the same
full-precision source, so cross-document equality holds exactly; reports
additionally carry the full-precision value under a ``*_precise`` key.

Anonymization replaces raw site ids with category-based pseudonyms and
reduces evidence URLs to a party/category/path-pattern form, leaving no
hostname anywhere in the emitted bytes. Detector evidence descriptions
contain no hostnames by construction, so only ids and URLs need work.

All writers are deterministic: fixed sort orders, fixed formatting, no
timestamps. Identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

from .detectors import DIMENSIONS, DIMENSION_NAMES, DimensionResult, normalize_path
from .domains import (
    CategoryDictionary,
    PublicSuffixList,
    THIRD_PARTY,
    classify_party,
    default_category_dictionary,
)
from .manifest import Manifest, build_pseudonyms, category_stem
from .scoring import CaptureScore, ScoreSummary, SiteScore, summarize_scores
from urllib.parse import urlsplit

SITE_CSV_HEADER = (
    "site",
    "category",
    "requests",
    "api_calls",
    "size_kb",
    "quality_score",
    "redundant_excess",
    "missing_cache_pct",
    "third_party_pct",
)

# Evidence lists in site reports are capped; the full count is recorded.
MAX_EVIDENCE_PER_DIMENSION = 10


class CategoryMissing(ValueError):
    """Raised when a site lacks the category a pseudonym is built from."""


class IoFailure(OSError):
    """Raised when an output file cannot be written."""


def round1(value: float) -> float:
    """The single rounding rule for all displayed numbers."""
    return float(f"{value:.1f}")


def redact_url(
    url: str,
    site_domain: str,
    dictionary: CategoryDictionary | None = None,
    psl: PublicSuffixList | None = None,
) -> str:
    """Reduce a URL to ``<party>[/<category>]/<normalized-path>``.

    Strings without a host part (already-redacted values included) pass
    through unchanged, which makes redaction idempotent.
    """
    parts = urlsplit(url)
    if not parts.hostname:
        return url
    dictionary = dictionary or default_category_dictionary()
    path = normalize_path(parts.path) or "/"
    if classify_party(parts.hostname, site_domain, psl) == THIRD_PARTY:
        category = dictionary.categorize(parts.hostname)
        return f"third-party/{category}{path}" if path.startswith("/") else f"third-party/{category}/{path}"
    return f"first-party{path}" if path.startswith("/") else f"first-party/{path}"


def _redact_result(
    result: DimensionResult,
    site_domain: str,
    dictionary: CategoryDictionary | None,
    psl: PublicSuffixList | None,
) -> DimensionResult:
    evidence = tuple(
        dataclasses.replace(
            item,
            urls=tuple(redact_url(u, site_domain, dictionary, psl) for u in item.urls),
        )
        for item in result.evidence
    )
    return dataclasses.replace(result, evidence=evidence)


def anonymize_site(
    site: SiteScore,
    pseudonym: str,
    site_domain: str,
    dictionary: CategoryDictionary | None = None,
    psl: PublicSuffixList | None = None,
) -> SiteScore:
    """Rename one site to its pseudonym and redact all evidence URLs."""
    captures = tuple(
        dataclasses.replace(
            cap,
            site_id=pseudonym,
            dimensions={
                dim: _redact_result(res, site_domain, dictionary, psl)
                for dim, res in cap.dimensions.items()
            },
        )
        for cap in site.captures
    )
    return dataclasses.replace(site, site_id=pseudonym, captures=captures)


def anonymize_batch(
    sites: list[SiteScore],
    manifest: Manifest,
    dictionary: CategoryDictionary | None = None,
    psl: PublicSuffixList | None = None,
) -> list[SiteScore]:
    """Anonymize a batch using manifest-order pseudonyms.

    Site ids already equal to their pseudonym pass through unchanged, so
    the operation is a fixed point on its own output.
    """
    pseudonyms = build_pseudonyms(manifest)
    known_pseudonyms = set(pseudonyms.values())
    out = []
    for site in sites:
        if site.site_id in pseudonyms:
            record = manifest.get(site.site_id)
            out.append(anonymize_site(site, pseudonyms[site.site_id], record.domain, dictionary, psl))
        elif site.site_id in known_pseudonyms:
            out.append(site)
        elif not site.category:
            raise CategoryMissing(f"site {site.site_id!r} has no manifest entry or category")
        else:
            # Not in the manifest: extend the numbering for its category.
            stem = category_stem(site.category)
            taken = {p for p in known_pseudonyms if p.startswith(f"{stem}-")}
            k = 1
            while f"{stem}-{k}" in taken:
                k += 1
            pseudonym = f"{stem}-{k}"
            known_pseudonyms.add(pseudonym)
            out.append(anonymize_site(site, pseudonym, "", dictionary, psl))
    return out


def anonymized_manifest_records(manifest: Manifest) -> list[dict]:
    """Manifest rendering with ids replaced and domains dropped."""
    pseudonyms = build_pseudonyms(manifest)
    records = []
    for record in manifest.sites:
        item: dict = {
            "site": pseudonyms[record.site_id],
            "category": record.category,
            "architecture": record.architecture,
            "pages": list(record.pages),
        }
        if record.exclusion is not None:
            item["exclusion"] = record.exclusion
        records.append(item)
    return records


def _site_row(site: SiteScore) -> dict[str, float | str]:
    return {
        "site": site.site_id,
        "category": site.category,
        "requests": round1(site.mean_requests),
        "api_calls": round1(site.mean_api_calls),
        "size_kb": round1(site.mean_size_kb),
        "quality_score": round1(site.mean_composite),
        "redundant_excess": round1(site.dimension_metric_means["D1"]),
        "missing_cache_pct": round1(site.dimension_metric_means["D4"]),
        "third_party_pct": round1(site.dimension_metric_means["D7"]),
    }


def write_site_csv(sites: list[SiteScore], path: str | Path) -> None:
    """One row per site, ascending by quality score, one decimal place."""
    if not sites:
        raise ValueError("refusing to write an empty site CSV")
    ordered = sorted(sites, key=lambda s: (s.mean_composite, s.site_id))
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(SITE_CSV_HEADER)
            for site in ordered:
                row = _site_row(site)
                writer.writerow([
                    row["site"],
                    row["category"],
                    *(f"{row[col]:.1f}" for col in SITE_CSV_HEADER[2:]),
                ])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


_SUMMARY_COLUMNS = ("requests", "api_calls", "size_kb", "quality_score")


def batch_summary(sites: list[SiteScore]) -> dict[str, ScoreSummary]:
    """Summary statistics per numeric CSV column, over sites."""
    if not sites:
        raise ValueError("no sites to summarize")
    series = {
        "requests": [s.mean_requests for s in sites],
        "api_calls": [s.mean_api_calls for s in sites],
        "size_kb": [s.mean_size_kb for s in sites],
        "quality_score": [s.mean_composite for s in sites],
    }
    return {column: summarize_scores(values) for column, values in series.items()}


def write_summary_csv(sites: list[SiteScore], path: str | Path) -> None:
    summaries = batch_summary(sites)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["statistic", *_SUMMARY_COLUMNS])
            writer.writerow(["count", *(str(summaries[c].count) for c in _SUMMARY_COLUMNS)])
            for stat in ("mean", "median", "stddev", "min", "max"):
                attr = {"min": "minimum", "max": "maximum"}.get(stat, stat)
                writer.writerow([
                    stat,
                    *(f"{round1(getattr(summaries[c], attr)):.1f}" for c in _SUMMARY_COLUMNS),
                ])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _evidence_block(result: DimensionResult) -> list[dict]:
    return [
        {
            "description": item.description,
            "urls": list(item.urls),
            "value": item.value,
        }
        for item in result.evidence[:MAX_EVIDENCE_PER_DIMENSION]
    ]


def _capture_block(cap: CaptureScore) -> dict:
    dimensions = {}
    for dim in DIMENSIONS:
        result = cap.dimensions[dim]
        dimensions[dim] = {
            "name": DIMENSION_NAMES[dim],
            "raw_metric": round1(result.raw_metric),
            "raw_metric_precise": result.raw_metric,
            "score": round1(result.score),
            "score_precise": result.score,
            "evidence_count": len(result.evidence),
            "evidence": _evidence_block(result),
        }
    return {
        "page": cap.page_id,
        "run": cap.run_index,
        "requests": cap.request_count,
        "api_calls": cap.api_call_count,
        "size_kb": round1(cap.page_size_kb),
        "size_kb_precise": cap.page_size_kb,
        "composite": round1(cap.composite),
        "composite_precise": cap.composite,
        "dimensions": dimensions,
        "warnings": list(cap.warnings),
    }


def site_report_document(site: SiteScore) -> dict:
    """The per-site report document, with stable key order."""
    ordered = sorted(site.captures, key=lambda c: (c.page_id, c.run_index))
    aggregate = {
        "quality_score": round1(site.mean_composite),
        "quality_score_precise": site.mean_composite,
        "requests": round1(site.mean_requests),
        "requests_precise": site.mean_requests,
        "api_calls": round1(site.mean_api_calls),
        "api_calls_precise": site.mean_api_calls,
        "size_kb": round1(site.mean_size_kb),
        "size_kb_precise": site.mean_size_kb,
        "redundant_excess": round1(site.dimension_metric_means["D1"]),
        "redundant_excess_precise": site.dimension_metric_means["D1"],
        "missing_cache_pct": round1(site.dimension_metric_means["D4"]),
        "missing_cache_pct_precise": site.dimension_metric_means["D4"],
        "third_party_pct": round1(site.dimension_metric_means["D7"]),
        "third_party_pct_precise": site.dimension_metric_means["D7"],
        "dimension_scores": {dim: round1(site.dimension_score_means[dim]) for dim in DIMENSIONS},
        "dimension_scores_precise": {dim: site.dimension_score_means[dim] for dim in DIMENSIONS},
        "dimension_metrics": {dim: round1(site.dimension_metric_means[dim]) for dim in DIMENSIONS},
        "dimension_metrics_precise": {dim: site.dimension_metric_means[dim] for dim in DIMENSIONS},
    }
    return {
        "site": site.site_id,
        "category": site.category,
        "architecture": site.architecture,
        "capture_count": len(site.captures),
        "captures": [_capture_block(cap) for cap in ordered],
        "aggregate": aggregate,
        "warnings": list(site.warnings),
    }


def write_site_report(site: SiteScore, path: str | Path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(site_report_document(site), indent=2) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_json(document: object, path: str | Path) -> None:
    """Write any report document as deterministic, diffable JSON."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
