"""Anti-pattern detectors D1-D8.

Each detector is a pure function from a capture's API-call view (D7: all
entries) to a DimensionResult holding the raw severity metric, a 0-100
score and an evidence list. A score of 100 means no instances were found;
every scoring formula clamps into [0, 100].

Raw metric units per dimension:
  D1 excess duplicate calls, D2 pattern count, D3 wasted milliseconds,
  D4 percent, D5 response count, D6 estimated savings in KB (1 KB = 1000
  bytes throughout), D7 percent, D8 percent.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from urllib.parse import urlsplit

from .apicalls import ApiCallView
from .config import DEFAULT_THRESHOLDS, Thresholds
from .domains import (
    CategoryDictionary,
    EmptyHost,
    PublicSuffixList,
    THIRD_PARTY,
    classify_party,
    default_category_dictionary,
    registered_domain,
)
from .har import HarEntry, header_value

DIMENSIONS = ("D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8")

DIMENSION_NAMES = {
    "D1": "redundant_calls",
    "D2": "n_plus_one_patterns",
    "D3": "sequential_waterfalls",
    "D4": "missing_cache_headers",
    "D5": "oversized_payloads",
    "D6": "missing_compression",
    "D7": "third_party_overhead",
    "D8": "error_responses",
}

_CACHE_HEADERS = ("Cache-Control", "ETag", "Last-Modified")
_COMPRESSED_ENCODINGS = frozenset({"gzip", "br", "deflate"})
_DIGITS_RE = re.compile(r"^[0-9]+$")


@dataclass(frozen=True)
class Evidence:
    description: str
    urls: tuple[str, ...]
    value: float


@dataclass(frozen=True)
class DimensionResult:
    dimension: str
    raw_metric: float
    score: float
    evidence: tuple[Evidence, ...]

    @property
    def name(self) -> str:
        return DIMENSION_NAMES[self.dimension]


def _clamp_score(value: float) -> float:
    return min(100.0, max(0.0, value))


def normalize_path(url_path: str) -> str:
    """Replace fully-numeric path segments with ``{id}``; drop the query."""
    path = url_path.split("?", 1)[0]
    segments = path.split("/")
    return "/".join("{id}" if _DIGITS_RE.match(seg) else seg for seg in segments)


def _safe_registered_domain(host: str, psl: PublicSuffixList | None) -> str:
    if not host:
        return ""
    try:
        return registered_domain(host, psl)
    except EmptyHost:
        return ""


def detect_redundant(calls: list[ApiCallView], thresholds: Thresholds = DEFAULT_THRESHOLDS) -> DimensionResult:
    """D1: identical API calls (same method + full URL) repeated in one load."""
    groups = Counter((view.entry.method, view.entry.url) for view in calls)
    excess = 0
    evidence = []
    for (method, url), count in sorted(groups.items(), key=lambda kv: (-kv[1], kv[0])):
        if count >= 2:
            excess += count - 1
            evidence.append(Evidence(
                description=f"{method} request repeated {count} times",
                urls=(url,),
                value=float(count - 1),
            ))
    score = _clamp_score(100.0 - excess * thresholds.redundant_points_per_excess)
    return DimensionResult("D1", float(excess), score, tuple(evidence))


def detect_n_plus_one(
    calls: list[ApiCallView],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    psl: PublicSuffixList | None = None,
) -> DimensionResult:
    """D2: bursts of calls differing only in numeric path segments."""
    groups: dict[tuple[str, str, str], set[str]] = defaultdict(set)
    for view in calls:
        entry = view.entry
        key = (
            entry.method,
            _safe_registered_domain(entry.host, psl),
            normalize_path(entry.path),
        )
        groups[key].add(entry.url)

    patterns = 0
    evidence = []
    for (method, domain, pattern), urls in sorted(groups.items()):
        if "{id}" in pattern and len(urls) >= thresholds.n_plus_one_min_distinct_urls:
            patterns += 1
            # Hostnames stay out of descriptions; redaction touches urls only.
            evidence.append(Evidence(
                description=f"{method} {pattern} fetched for {len(urls)} distinct ids",
                urls=tuple(sorted(urls)[:5]),
                value=float(len(urls)),
            ))
    score = _clamp_score(100.0 - patterns * thresholds.n_plus_one_points_per_pattern)
    return DimensionResult("D2", float(patterns), score, tuple(evidence))


def detect_waterfalls(
    calls: list[ApiCallView],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    psl: PublicSuffixList | None = None,
) -> DimensionResult:
    """D3: consecutive same-domain calls run strictly one-after-another.

    Wasted time is estimated as the predecessor's duration for each
    adjacent (by start time) same-domain pair of different endpoints where
    the successor started only after the predecessor finished: the
    head-start the successor forfeited. Dependency edges are invisible in
    a capture, so legitimately dependent chains are counted too.
    """
    ordered = sorted(calls, key=lambda view: view.entry.started_at)
    wasted_ms = 0.0
    evidence = []
    for first, second in zip(ordered, ordered[1:]):
        a, b = first.entry, second.entry
        if a.duration_ms <= 0:
            # A zero-duration predecessor forfeits no head start.
            continue
        domain_a = _safe_registered_domain(a.host, psl)
        if not domain_a or domain_a != _safe_registered_domain(b.host, psl):
            continue
        if normalize_path(a.path) == normalize_path(b.path):
            continue
        gap_ms = (b.started_at - a.started_at).total_seconds() * 1000.0
        if gap_ms >= a.duration_ms:
            wasted_ms += a.duration_ms
            evidence.append(Evidence(
                description="sequential same-domain calls to different endpoints",
                urls=(a.url, b.url),
                value=a.duration_ms,
            ))
    score = _clamp_score(100.0 - wasted_ms / thresholds.waterfall_ms_per_point)
    return DimensionResult("D3", wasted_ms, score, tuple(evidence))


def detect_missing_cache(calls: list[ApiCallView], thresholds: Thresholds = DEFAULT_THRESHOLDS) -> DimensionResult:
    """D4: HTTP 200 API responses with no Cache-Control, ETag or Last-Modified."""
    successful = [view for view in calls if view.entry.status == 200]
    missing = [
        view for view in successful
        if all(header_value(view.entry, "response", name) is None for name in _CACHE_HEADERS)
    ]
    missing_pct = 100.0 * len(missing) / len(successful) if successful else 0.0
    evidence = tuple(
        Evidence(
            description="200 response without any cache-guidance header",
            urls=(view.entry.url,),
            value=1.0,
        )
        for view in missing
    )
    score = _clamp_score(100.0 - missing_pct)
    return DimensionResult("D4", missing_pct, score, evidence)


def detect_oversized(calls: list[ApiCallView], thresholds: Thresholds = DEFAULT_THRESHOLDS) -> DimensionResult:
    """D5: API response bodies strictly larger than the oversize threshold.

    Unknown sizes (body_size == -1) are not evidence and are never counted.
    """
    offenders = [view for view in calls if view.entry.body_size > thresholds.oversized_body_bytes]
    evidence = tuple(
        Evidence(
            description=f"response body of {view.entry.body_size} bytes",
            urls=(view.entry.url,),
            value=float(view.entry.body_size),
        )
        for view in offenders
    )
    score = _clamp_score(100.0 - len(offenders) * thresholds.oversized_points_per_response)
    return DimensionResult("D5", float(len(offenders)), score, evidence)


def _is_compressed(entry: HarEntry) -> bool:
    encoding = header_value(entry, "response", "Content-Encoding")
    if encoding is None:
        return False
    tokens = {token.strip().lower() for token in encoding.split(",")}
    return bool(tokens & _COMPRESSED_ENCODINGS)


def detect_missing_compression(calls: list[ApiCallView], thresholds: Thresholds = DEFAULT_THRESHOLDS) -> DimensionResult:
    """D6: compressible API responses served without Content-Encoding.

    Savings are estimated at the configured compression ratio over the
    uncompressed body size.
    """
    savings_bytes = 0.0
    evidence = []
    for view in calls:
        entry = view.entry
        if entry.body_size > thresholds.compression_min_body_bytes and not _is_compressed(entry):
            saved = thresholds.compression_savings_ratio * entry.body_size
            savings_bytes += saved
            evidence.append(Evidence(
                description=f"uncompressed {entry.body_size}-byte response",
                urls=(entry.url,),
                value=saved / 1000.0,
            ))
    savings_kb = savings_bytes / 1000.0
    score = _clamp_score(100.0 - savings_kb / thresholds.compression_kb_per_point)
    return DimensionResult("D6", savings_kb, score, tuple(evidence))


def detect_third_party(
    entries: tuple[HarEntry, ...] | list[HarEntry],
    site_domain: str,
    dictionary: CategoryDictionary | None = None,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    psl: PublicSuffixList | None = None,
) -> DimensionResult:
    """D7: share of all requests (not only API calls) on third-party domains."""
    dictionary = dictionary or default_category_dictionary()
    with_host = [entry for entry in entries if entry.host]
    by_category: dict[str, list[HarEntry]] = defaultdict(list)
    third = 0
    for entry in with_host:
        if classify_party(entry.host, site_domain, psl) == THIRD_PARTY:
            third += 1
            by_category[dictionary.categorize(entry.host)].append(entry)

    third_pct = 100.0 * third / len(with_host) if with_host else 0.0
    evidence = tuple(
        Evidence(
            description=f"third-party requests: {category}",
            urls=tuple(sorted({e.url for e in members})[:3]),
            value=float(len(members)),
        )
        for category, members in sorted(by_category.items())
    )
    score = _clamp_score(100.0 - third_pct)
    return DimensionResult("D7", third_pct, score, evidence)


def detect_errors(calls: list[ApiCallView], thresholds: Thresholds = DEFAULT_THRESHOLDS) -> DimensionResult:
    """D8: API calls answered with HTTP 4xx/5xx.

    Aborted calls (status 0) are outside the denominator; only definite
    statuses count.
    """
    completed = [view for view in calls if view.entry.status >= 100]
    errored = [view for view in completed if view.entry.status >= 400]
    error_pct = 100.0 * len(errored) / len(completed) if completed else 0.0
    evidence = tuple(
        Evidence(
            description=f"API call returned HTTP {view.entry.status}",
            urls=(view.entry.url,),
            value=float(view.entry.status),
        )
        for view in errored
    )
    score = _clamp_score(100.0 - error_pct * thresholds.error_points_per_percent)
    return DimensionResult("D8", error_pct, score, evidence)


def detect_all(
    entries: tuple[HarEntry, ...],
    calls: list[ApiCallView],
    site_domain: str,
    dictionary: CategoryDictionary | None = None,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    psl: PublicSuffixList | None = None,
) -> dict[str, DimensionResult]:
    """Run all eight detectors over one capture's entries and API calls."""
    return {
        "D1": detect_redundant(calls, thresholds),
        "D2": detect_n_plus_one(calls, thresholds, psl),
        "D3": detect_waterfalls(calls, thresholds, psl),
        "D4": detect_missing_cache(calls, thresholds),
        "D5": detect_oversized(calls, thresholds),
        "D6": detect_missing_compression(calls, thresholds),
        "D7": detect_third_party(entries, site_domain, dictionary, thresholds, psl),
        "D8": detect_errors(calls, thresholds),
    }
