"""HAR 1.2 ingestion.

Parses HTTP Archive files into an immutable capture model. Only the fields
the analysis consumes are retained: method, URL, status, headers, sizes and
timing. Response bodies are never read, so the headers-only captures the
capture pipeline produces parse identically to full archives.

Parsing is a pure function of the file bytes; a parsed capture is frozen and
safe to share across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlsplit

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

# <site>__<page>__run<k>.har
_FILENAME_RE = re.compile(r"^(?P<site>.+?)__(?P<page>.+?)__run(?P<run>\d+)$")

# trim sub-microsecond digits that datetime.fromisoformat cannot take
_FRACTION_RE = re.compile(r"(\.\d{6})\d+")


class HarError(Exception):
    """Base class for per-file ingestion failures."""


class MalformedDocument(HarError):
    """The file is not parseable as a HAR JSON document."""


class MissingLog(HarError):
    """The document carries no log.entries array."""


@dataclass(frozen=True)
class HarEntry:
    """One request/response pair as observed on the wire.

    Sentinels: ``status == 0`` means the request never completed;
    ``body_size == -1`` / ``transfer_size == -1`` mean the size is unknown.
    """

    method: str
    url: str
    host: str
    status: int
    request_headers: tuple[tuple[str, str], ...]
    response_headers: tuple[tuple[str, str], ...]
    mime_type: str
    body_size: int
    transfer_size: int
    started_at: datetime
    duration_ms: float

    @property
    def path(self) -> str:
        return urlsplit(self.url).path


@dataclass(frozen=True)
class HarCapture:
    """All entries of one capture: one visit of one page of one site."""

    site_id: str
    page_id: str
    run_index: int
    entries: tuple[HarEntry, ...]
    captured_at: datetime | None = None
    warnings: tuple[str, ...] = ()

    @property
    def provenance(self) -> str:
        """The capture's identity in file-name form."""
        return f"{self.site_id}__{self.page_id}__run{self.run_index}"


def header_value(entry: HarEntry, side: str, name: str) -> str | None:
    """Return the first header value matching ``name`` case-insensitively.

    ``side`` is ``"request"`` or ``"response"``. Returns None when the
    header is absent.
    """
    if side == "request":
        headers = entry.request_headers
    elif side == "response":
        headers = entry.response_headers
    else:
        raise ValueError(f"side must be 'request' or 'response', got {side!r}")
    wanted = name.lower()
    for header_name, value in headers:
        if header_name.lower() == wanted:
            return value
    return None


def has_header(entry: HarEntry, side: str, name: str) -> bool:
    return header_value(entry, side, name) is not None


def _parse_timestamp(raw: object) -> datetime | None:
    if not isinstance(raw, str) or not raw:
        return None
    text = _FRACTION_RE.sub(r"\1", raw.strip().replace("Z", "+00:00"))
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def _parse_headers(raw: object) -> tuple[tuple[str, str], ...]:
    if not isinstance(raw, list):
        return ()
    out = []
    for item in raw:
        if isinstance(item, dict):
            out.append((str(item.get("name", "")), str(item.get("value", ""))))
    return tuple(out)


def _parse_size(raw: object) -> int:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        return -1
    value = int(raw)
    return value if value >= 0 else -1


def _parse_entry(raw: dict, previous_start: datetime) -> HarEntry:
    request = raw.get("request") if isinstance(raw.get("request"), dict) else {}
    response = raw.get("response") if isinstance(raw.get("response"), dict) else {}
    content = response.get("content") if isinstance(response.get("content"), dict) else {}

    method = str(request.get("method") or "GET").split()[0].upper()
    url = str(request.get("url") or "")
    host = (urlsplit(url).hostname or "") if url else ""

    status_raw = response.get("status")
    status = status_raw if isinstance(status_raw, int) and not isinstance(status_raw, bool) else 0
    if not (status == 0 or 100 <= status <= 599):
        status = 0

    body_size = _parse_size(response.get("bodySize"))
    if body_size < 0:
        body_size = _parse_size(content.get("size"))

    started_at = _parse_timestamp(raw.get("startedDateTime")) or previous_start

    time_raw = raw.get("time")
    duration_ms = float(time_raw) if isinstance(time_raw, (int, float)) and not isinstance(time_raw, bool) else 0.0

    return HarEntry(
        method=method,
        url=url,
        host=host,
        status=status,
        request_headers=_parse_headers(request.get("headers")),
        response_headers=_parse_headers(response.get("headers")),
        mime_type=str(content.get("mimeType") or ""),
        body_size=body_size,
        transfer_size=_parse_size(response.get("_transferSize")),
        started_at=started_at,
        duration_ms=max(0.0, duration_ms),
    )


def parse_har(raw_bytes: bytes, provenance: tuple[str, str, int]) -> HarCapture:
    """Parse HAR bytes into a capture.

    Raises MalformedDocument when the bytes are not a JSON object and
    MissingLog when there is no log.entries array. Both are fatal for this
    file only; batch runners catch them and keep going.
    """
    site_id, page_id, run_index = provenance
    try:
        document = json.loads(raw_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocument(f"not a HAR JSON document: {exc}") from exc
    if not isinstance(document, dict):
        raise MalformedDocument("top-level value is not an object")

    log = document.get("log")
    if not isinstance(log, dict) or not isinstance(log.get("entries"), list):
        raise MissingLog("document has no log.entries array")

    warnings: list[str] = []
    entries: list[HarEntry] = []
    previous_start = EPOCH
    for raw_entry in log["entries"]:
        if not isinstance(raw_entry, dict):
            warnings.append("skipped a non-object entry")
            continue
        entry = _parse_entry(raw_entry, previous_start)
        previous_start = entry.started_at
        entries.append(entry)

    if not entries:
        warnings.append("capture has no entries")

    captured_at = None
    pages = log.get("pages")
    if isinstance(pages, list) and pages and isinstance(pages[0], dict):
        captured_at = _parse_timestamp(pages[0].get("startedDateTime"))
    if captured_at is None and entries:
        captured_at = entries[0].started_at

    return HarCapture(
        site_id=site_id,
        page_id=page_id,
        run_index=run_index,
        entries=tuple(entries),
        captured_at=captured_at,
        warnings=tuple(warnings),
    )


def provenance_from_filename(filename: str | Path) -> tuple[str, str, int]:
    """Derive (site_id, page_id, run_index) from ``<site>__<page>__run<k>.har``.

    Files that do not follow the convention fall back to
    (stem, "page", 1) so a stray capture still parses; a manifest can
    always override the result.
    """
    stem = Path(filename).stem
    match = _FILENAME_RE.match(stem)
    if match:
        return (match.group("site"), match.group("page"), int(match.group("run")))
    return (stem, "page", 1)


def load_har_file(path: str | Path, provenance: tuple[str, str, int] | None = None) -> HarCapture:
    path = Path(path)
    if provenance is None:
        provenance = provenance_from_filename(path)
    return parse_har(path.read_bytes(), provenance)
