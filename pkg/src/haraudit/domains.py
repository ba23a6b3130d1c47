"""Registered-domain extraction and third-party categorization.

The first-party/third-party split keys on the registrable domain (eTLD+1)
of each request host, looked up against a vendored Public Suffix List
snapshot so multi-part TLDs like .co.uk resolve correctly. Third-party
hosts are bucketed into analytics/ads/social/cdn/tracking/other through a
substring dictionary that ships with ~90 default patterns and can be
replaced from a config file.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

FIRST_PARTY = "first_party"
THIRD_PARTY = "third_party"
PARTY_LABELS = frozenset({FIRST_PARTY, THIRD_PARTY})

CATEGORY_OTHER = "other"
THIRD_PARTY_CATEGORIES = ("analytics", "ads", "social", "cdn", "tracking", CATEGORY_OTHER)

PSL_SNAPSHOT_FILE = "public_suffix_list.dat"
CATEGORY_DICT_FILE = "third_party_categories.tsv"


class EmptyHost(ValueError):
    """Raised when a hostname expected to be non-empty is empty."""


class PublicSuffixList:
    """Effective-TLD lookups over a rule snapshot.

    Implements the standard matching algorithm: the prevailing rule is an
    exception rule if one matches, otherwise the matching rule with the
    most labels; hosts matching no rule fall under the implicit ``*`` rule
    (the rightmost label is the suffix).
    """

    def __init__(self, rules):
        self._rules = frozenset(rules)

    @classmethod
    def from_file(cls, path: str | Path) -> "PublicSuffixList":
        rules = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("//"):
                rules.append(line.lower())
        return cls(rules)

    def suffix_label_count(self, labels: list[str]) -> int:
        """Number of trailing labels forming the public suffix."""
        n = len(labels)
        for i in range(n):
            candidate = ".".join(labels[i:])
            if "!" + candidate in self._rules:
                return n - i - 1
            if candidate in self._rules:
                return n - i
            if i + 1 < n and "*." + ".".join(labels[i + 1:]) in self._rules:
                return n - i
        return 1


_default_psl: PublicSuffixList | None = None


def default_psl() -> PublicSuffixList:
    global _default_psl
    if _default_psl is None:
        with resources.as_file(resources.files("haraudit").joinpath("data", PSL_SNAPSHOT_FILE)) as path:
            _default_psl = PublicSuffixList.from_file(path)
    return _default_psl


def _is_ip_literal(host: str) -> bool:
    try:
        ipaddress.ip_address(host.strip("[]"))
    except ValueError:
        return False
    return True


def registered_domain(host: str, psl: PublicSuffixList | None = None) -> str:
    """Return the registrable domain (one label below the effective TLD).

    IP literals are returned unchanged, and a host that is itself a public
    suffix is its own fixed point (so the function is idempotent).
    """
    if not host:
        raise EmptyHost("host is empty")
    host = host.lower().rstrip(".")
    if not host:
        raise EmptyHost("host is empty")
    if _is_ip_literal(host):
        return host
    labels = host.split(".")
    suffix_len = (psl or default_psl()).suffix_label_count(labels)
    if suffix_len >= len(labels):
        return host
    return ".".join(labels[len(labels) - suffix_len - 1:])


def classify_party(entry_host: str, site_domain: str, psl: PublicSuffixList | None = None) -> str:
    """first_party iff the host's registrable domain equals the site's."""
    return FIRST_PARTY if registered_domain(entry_host, psl) == site_domain.lower() else THIRD_PARTY


@dataclass(frozen=True)
class CategoryDictionary:
    """Ordered host-substring patterns mapping to third-party categories.

    Match order is deterministic regardless of input order: longest
    pattern first, ties broken lexicographically.
    """

    patterns: tuple[tuple[str, str], ...]

    @classmethod
    def from_pairs(cls, pairs) -> "CategoryDictionary":
        seen: dict[str, str] = {}
        for pattern, category in pairs:
            pattern = pattern.strip().lower()
            category = category.strip().lower()
            if not pattern:
                continue
            if category not in THIRD_PARTY_CATEGORIES:
                raise ValueError(f"unknown third-party category: {category!r}")
            seen[pattern] = category
        if not seen:
            raise ValueError("category dictionary is empty")
        ordered = sorted(seen.items(), key=lambda item: (-len(item[0]), item[0]))
        return cls(patterns=tuple(ordered))

    @classmethod
    def from_file(cls, path: str | Path) -> "CategoryDictionary":
        """Load ``pattern<TAB>category`` lines; ``#`` starts a comment."""
        pairs = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected pattern<TAB>category")
            pattern, category = line.split("\t", 1)
            pairs.append((pattern, category))
        return cls.from_pairs(pairs)

    def categorize(self, host: str) -> str:
        host = host.lower()
        for pattern, category in self.patterns:
            if pattern in host:
                return category
        return CATEGORY_OTHER


_default_categories: CategoryDictionary | None = None


def default_category_dictionary() -> CategoryDictionary:
    global _default_categories
    if _default_categories is None:
        with resources.as_file(resources.files("haraudit").joinpath("data", CATEGORY_DICT_FILE)) as path:
            _default_categories = CategoryDictionary.from_file(path)
    return _default_categories


def categorize_third_party(host: str, dictionary: CategoryDictionary | None = None) -> str:
    return (dictionary or default_category_dictionary()).categorize(host)
