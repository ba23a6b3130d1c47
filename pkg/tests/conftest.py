"""Shared builders for synthetic HAR content and fixture paths."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from haraudit import parse_har

FIXTURES = Path(__file__).resolve().parent / "fixtures"
GOLDEN_DIR = FIXTURES / "golden"
CORPUS_DIR = FIXTURES / "corpus"
CORPUS_MANIFEST = FIXTURES / "corpus_manifest.json"

T0 = "2026-01-05T10:00:00.000Z"


def make_entry(
    url: str = "https://site.test/api/items",
    method: str = "GET",
    status: int = 200,
    mime: str = "application/json",
    started: str = T0,
    duration: float = 10.0,
    body: int = 500,
    request_headers: list[tuple[str, str]] | None = None,
    response_headers: list[tuple[str, str]] | None = None,
) -> dict:
    """One raw HAR entry dict with sensible defaults."""
    resp = [{"name": n, "value": v} for n, v in (response_headers or [])]
    if not any(h["name"].lower() == "content-type" for h in resp) and mime:
        resp.insert(0, {"name": "Content-Type", "value": mime})
    return {
        "startedDateTime": started,
        "time": duration,
        "request": {
            "method": method,
            "url": url,
            "headers": [{"name": n, "value": v} for n, v in (request_headers or [])],
        },
        "response": {
            "status": status,
            "headers": resp,
            "content": {"size": body, "mimeType": mime},
            "bodySize": body,
        },
    }


def make_har_bytes(entries: list[dict]) -> bytes:
    document = {
        "log": {
            "version": "1.2",
            "creator": {"name": "test", "version": "0"},
            "entries": entries,
        }
    }
    return json.dumps(document).encode("utf-8")


def make_capture(entries: list[dict], site: str = "site", page: str = "home", run: int = 1):
    return parse_har(make_har_bytes(entries), (site, page, run))


def write_har(path: Path, entries: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(make_har_bytes(entries))


@pytest.fixture(scope="session")
def corpus_manifest():
    from haraudit import load_manifest

    return load_manifest(CORPUS_MANIFEST)


@pytest.fixture(scope="session")
def analyzed_corpus(tmp_path_factory, corpus_manifest):
    """The committed corpus analyzed once, anonymized, for read-only tests."""
    from haraudit import run_analysis

    out = tmp_path_factory.mktemp("corpus-out")
    result = run_analysis(CORPUS_DIR, corpus_manifest, out, anonymize=True)
    assert not result.parse_errors
    return result
