"""Site manifest: the registry mapping raw site ids to domains and categories.

The manifest is a JSON array of site records. Each record carries the
fields the analysis needs beyond what a HAR file knows about itself: the
first-party domain (anchor for third-party classification) and the site
category (basis for pseudonyms). Records may declare an exclusion, which
exempts the site from analysis and from the capture-completeness check.

Pseudonyms are assigned per category in manifest order, so anyone holding
the manifest and the outputs can reproduce the mapping without a lookup
table being published alongside the anonymized data.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

# Pseudonym stems for category names that do not CamelCase cleanly.
# Site categories are otherwise an open vocabulary.
_CATEGORY_STEMS = {
    "E-commerce": "Commerce",
    "Dev Tools": "DevTool",
    "Dev Blog": "DevBlog",
}


class ManifestError(ValueError):
    """Raised for manifests that cannot be loaded or fail validation."""


@dataclass(frozen=True)
class SiteRecord:
    site_id: str
    domain: str
    category: str
    architecture: str = ""
    pages: tuple[str, ...] = ()
    exclusion: str | None = None

    @property
    def excluded(self) -> bool:
        return self.exclusion is not None


@dataclass(frozen=True)
class Manifest:
    sites: tuple[SiteRecord, ...]
    path: Path | None = None
    _by_id: dict[str, SiteRecord] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._by_id.update({record.site_id: record for record in self.sites})

    def __iter__(self):
        return iter(self.sites)

    def __len__(self) -> int:
        return len(self.sites)

    def get(self, site_id: str) -> SiteRecord | None:
        return self._by_id.get(site_id)

    def included_sites(self) -> tuple[SiteRecord, ...]:
        return tuple(record for record in self.sites if not record.excluded)

    def hostnames(self) -> tuple[str, ...]:
        """All first-party domains, for anonymization soundness scans."""
        return tuple(record.domain for record in self.sites)


def category_stem(category: str) -> str:
    """Pseudonym stem for a category: special-cased or CamelCased."""
    if category in _CATEGORY_STEMS:
        return _CATEGORY_STEMS[category]
    words = re.split(r"[\s_-]+", category.strip())
    return "".join(word[:1].upper() + word[1:] for word in words if word)


def build_pseudonyms(manifest: Manifest) -> dict[str, str]:
    """Assign ``<CategoryStem>-<k>`` pseudonyms in manifest order.

    Counters are per category and cover excluded sites too, so the
    numbering is stable under exclusion toggles of later entries.
    """
    counters: dict[str, int] = {}
    mapping: dict[str, str] = {}
    for record in manifest.sites:
        stem = category_stem(record.category)
        counters[stem] = counters.get(stem, 0) + 1
        mapping[record.site_id] = f"{stem}-{counters[stem]}"
    return mapping


def _require_str(raw: dict, key: str, index: int, allow_empty: bool = False) -> str:
    value = raw.get(key)
    if not isinstance(value, str) or (not allow_empty and not value.strip()):
        raise ManifestError(f"site #{index}: field {key!r} must be a non-empty string")
    return value.strip()


def parse_manifest(raw_text: str, path: Path | None = None) -> Manifest:
    try:
        data = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ManifestError("manifest must be a JSON array of site records")

    records = []
    seen_ids: set[str] = set()
    for index, raw in enumerate(data):
        if not isinstance(raw, dict):
            raise ManifestError(f"site #{index}: record must be an object")
        site_id = _require_str(raw, "id", index)
        domain = _require_str(raw, "domain", index).lower().rstrip(".")
        category = _require_str(raw, "category", index)
        if site_id in seen_ids:
            raise ManifestError(f"site #{index}: duplicate id {site_id!r}")
        seen_ids.add(site_id)

        architecture = raw.get("architecture", "")
        if not isinstance(architecture, str):
            raise ManifestError(f"site #{index}: field 'architecture' must be a string")

        pages_raw = raw.get("pages", [])
        if not isinstance(pages_raw, list) or any(not isinstance(p, str) for p in pages_raw):
            raise ManifestError(f"site #{index}: field 'pages' must be a list of strings")

        exclusion = raw.get("exclusion")
        if exclusion is not None and not isinstance(exclusion, str):
            raise ManifestError(f"site #{index}: field 'exclusion' must be a string when present")

        records.append(SiteRecord(
            site_id=site_id,
            domain=domain,
            category=category,
            architecture=architecture.strip(),
            pages=tuple(pages_raw),
            exclusion=exclusion,
        ))
    return Manifest(sites=tuple(records), path=path)


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        raw_text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    return parse_manifest(raw_text, path=path)
