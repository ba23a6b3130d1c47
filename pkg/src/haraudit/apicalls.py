"""API call identification.

A request counts as an API call when any of five disjunctive heuristics
fires: JSON/GraphQL response content type, the XMLHttpRequest marker
header, a JSON Accept header, a JSON request body content type, or an
API-looking URL path. Every matched heuristic is recorded on the view so
downstream consumers can audit why a request was classified.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlsplit

from .har import HarCapture, HarEntry, header_value

H1_RESPONSE_CONTENT_TYPE = "H1_response_content_type"
H2_XHR_HEADER = "H2_xhr_header"
H3_ACCEPT_HEADER = "H3_accept_header"
H4_REQUEST_CONTENT_TYPE = "H4_request_content_type"
H5_URL_PATTERN = "H5_url_pattern"

ALL_HEURISTICS = (
    H1_RESPONSE_CONTENT_TYPE,
    H2_XHR_HEADER,
    H3_ACCEPT_HEADER,
    H4_REQUEST_CONTENT_TYPE,
    H5_URL_PATTERN,
)

_JSONISH_TOKENS = ("application/json", "application/graphql")

# Matched against the URL path component only, case-sensitively.
DEFAULT_URL_PATTERNS = (
    "/api/",
    "/graphql",
    "/v1/",
    "/v2/",
    "/v3/",
    "/ajax/",
    "/rest/",
    "/_next/data/",
    "/wp-json/",
)


@dataclass(frozen=True)
class ApiCallView:
    """An entry flagged as an API call, with the heuristics that fired."""

    entry: HarEntry
    matched_heuristics: frozenset[str]


def _contains_jsonish(value: str | None) -> bool:
    if not value:
        return False
    lowered = value.lower()
    return any(token in lowered for token in _JSONISH_TOKENS)


def is_api_call(entry: HarEntry, url_patterns=DEFAULT_URL_PATTERNS) -> ApiCallView | None:
    """Classify one entry; returns None when no heuristic matches."""
    matched = set()

    response_type = header_value(entry, "response", "Content-Type") or entry.mime_type
    if _contains_jsonish(response_type):
        matched.add(H1_RESPONSE_CONTENT_TYPE)

    xhr = header_value(entry, "request", "X-Requested-With")
    if xhr is not None and xhr.strip().lower() == "xmlhttprequest":
        matched.add(H2_XHR_HEADER)

    accept = header_value(entry, "request", "Accept")
    if accept and "application/json" in accept.lower():
        matched.add(H3_ACCEPT_HEADER)

    request_type = header_value(entry, "request", "Content-Type")
    if request_type and "application/json" in request_type.lower():
        matched.add(H4_REQUEST_CONTENT_TYPE)

    path = urlsplit(entry.url).path
    if any(pattern in path for pattern in url_patterns):
        matched.add(H5_URL_PATTERN)

    if not matched:
        return None
    return ApiCallView(entry=entry, matched_heuristics=frozenset(matched))


def api_calls(capture: HarCapture, url_patterns=DEFAULT_URL_PATTERNS) -> list[ApiCallView]:
    """All API calls of a capture, in entry order."""
    views = []
    for entry in capture.entries:
        view = is_api_call(entry, url_patterns)
        if view is not None:
            views.append(view)
    return views


def load_url_patterns(path: str | Path) -> tuple[str, ...]:
    """Load replacement URL path patterns, one per line, ``#`` comments.

    The file replaces the compiled-in list, so include the defaults when
    extending rather than narrowing.
    """
    patterns = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            patterns.append(line)
    if not patterns:
        raise ValueError(f"{path}: no URL patterns found")
    return tuple(patterns)
