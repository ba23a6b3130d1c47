"""Tunable thresholds for detectors and validation checks.

Every magic number used by a detector or a validation check lives here so a
single config object can override them. The defaults are the published
operating points; none of them is empirically calibrated per application
type, so treat them as policy, not ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class Thresholds:
    # D1: points deducted per excess duplicate call
    redundant_points_per_excess: float = 10.0
    # D2: a normalized path group is a pattern at this many distinct URLs
    n_plus_one_min_distinct_urls: int = 3
    n_plus_one_points_per_pattern: float = 20.0
    # D3: milliseconds of wasted sequential time per point deducted
    waterfall_ms_per_point: float = 50.0
    # D5: strict lower bound, in bytes, for an oversized response body
    oversized_body_bytes: int = 100_000
    oversized_points_per_response: float = 15.0
    # D6: bodies above this size (bytes) are expected to be compressed;
    # estimated savings ratio; KB (decimal, 1000 bytes) per point deducted
    compression_min_body_bytes: int = 1_000
    compression_savings_ratio: float = 0.7
    compression_kb_per_point: float = 5.0
    # D8: points deducted per percent of error responses
    error_points_per_percent: float = 5.0
    # validation: allowed drift when recomputing reported numbers
    composite_tolerance: float = 0.2
    request_count_tolerance: float = 0.5
    # validation: max/min request-count ratio across a page's runs that is
    # still considered ordinary run-to-run variation
    run_ratio_warn_threshold: float = 3.0

    def with_overrides(self, **overrides) -> "Thresholds":
        return replace(self, **overrides)

    @classmethod
    def from_file(cls, path: str | Path) -> "Thresholds":
        """Load overrides from a JSON object keyed by field name."""
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"unknown threshold keys: {', '.join(unknown)}")
        return cls(**raw)


DEFAULT_THRESHOLDS = Thresholds()
