"""Composite quality score over the eight detector dimensions.

The composite is a weighted mean of per-dimension scores, each clamped
into [0, 100] first, so it always lands in [0, 100] itself. Weight maps
must cover all eight dimensions and sum to 1 within a tight tolerance;
normalize_weights rescales a positive map so only relative sizes matter.

Site scores are flat means over capture composites. Averaging happens
after the per-capture clamps, so a site mean is generally not the score
of the mean raw metrics; aggregation keeps the per-capture composites
around precisely so that distinction stays visible.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from pathlib import Path

from .apicalls import api_calls
from .config import DEFAULT_THRESHOLDS, Thresholds
from .detectors import DIMENSIONS, DimensionResult, detect_all
from .domains import CategoryDictionary, PublicSuffixList
from .har import HarCapture

WEIGHT_SUM_TOLERANCE = 1e-9

DEFAULT_WEIGHTS = {
    "D1": 0.15,
    "D2": 0.10,
    "D3": 0.10,
    "D4": 0.15,
    "D5": 0.15,
    "D6": 0.10,
    "D7": 0.15,
    "D8": 0.10,
}


class InvalidWeights(ValueError):
    """Raised for weight maps that fail validation."""


class MissingDimension(ValueError):
    """Raised when a score map lacks one of the eight dimensions."""


class MixedSites(ValueError):
    """Raised when captures from different sites are aggregated together."""


def _check_shape(weights: dict[str, float]) -> None:
    unknown = set(weights) - set(DIMENSIONS)
    if unknown:
        raise InvalidWeights(f"unknown dimensions: {sorted(unknown)}")
    missing = set(DIMENSIONS) - set(weights)
    if missing:
        raise InvalidWeights(f"missing dimensions: {sorted(missing)}")
    for dim, value in weights.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InvalidWeights(f"weight for {dim} must be a number")
        if value < 0:
            raise InvalidWeights(f"weight for {dim} must be non-negative")


def validate_weights(weights: dict[str, float]) -> dict[str, float]:
    """Require a complete, non-negative map summing to 1 within tolerance."""
    _check_shape(weights)
    total = sum(weights.values())
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise InvalidWeights(f"weights sum to {total!r}, expected 1.0")
    return {dim: float(weights[dim]) for dim in DIMENSIONS}


def normalize_weights(weights: dict[str, float]) -> dict[str, float]:
    """Rescale a complete, non-negative map with positive sum to sum 1."""
    _check_shape(weights)
    total = sum(weights.values())
    if total <= 0:
        raise InvalidWeights("weights must sum to a positive value")
    return {dim: float(weights[dim]) / total for dim in DIMENSIONS}


def load_weights(path: str | Path) -> dict[str, float]:
    """Load a weight override file: a JSON object keyed by dimension id."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidWeights(f"cannot read weights file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidWeights(f"weights file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidWeights(f"weights file {path} must hold a JSON object")
    return validate_weights(data)


def clamp(score: float) -> float:
    return min(100.0, max(0.0, score))


def composite_score(
    dimension_scores: dict[str, float],
    weights: dict[str, float] | None = None,
) -> float:
    """Weighted mean of clamped per-dimension scores, in [0, 100]."""
    active = validate_weights(weights) if weights is not None else DEFAULT_WEIGHTS
    missing = set(DIMENSIONS) - set(dimension_scores)
    if missing:
        raise MissingDimension(f"missing dimension scores: {sorted(missing)}")
    return sum(active[dim] * clamp(dimension_scores[dim]) for dim in DIMENSIONS)


@dataclass(frozen=True)
class CaptureScore:
    site_id: str
    page_id: str
    run_index: int
    dimensions: dict[str, DimensionResult]
    composite: float
    request_count: int
    api_call_count: int
    page_size_kb: float
    warnings: tuple[str, ...] = ()

    @property
    def provenance(self) -> str:
        return f"{self.site_id}__{self.page_id}__run{self.run_index}"

    def dimension_scores(self) -> dict[str, float]:
        return {dim: res.score for dim, res in self.dimensions.items()}


def score_capture(
    capture: HarCapture,
    site_domain: str,
    weights: dict[str, float] | None = None,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    dictionary: CategoryDictionary | None = None,
    psl: PublicSuffixList | None = None,
) -> CaptureScore:
    """Classify, detect and score one capture against its first-party domain."""
    calls = api_calls(capture)
    results = detect_all(capture.entries, calls, site_domain, dictionary, thresholds, psl)
    composite = composite_score({dim: res.score for dim, res in results.items()}, weights)
    size_kb = sum(max(entry.body_size, 0) for entry in capture.entries) / 1000.0
    return CaptureScore(
        site_id=capture.site_id,
        page_id=capture.page_id,
        run_index=capture.run_index,
        dimensions=results,
        composite=composite,
        request_count=len(capture.entries),
        api_call_count=len(calls),
        page_size_kb=size_kb,
        warnings=capture.warnings,
    )


@dataclass(frozen=True)
class SiteScore:
    site_id: str
    category: str
    architecture: str
    captures: tuple[CaptureScore, ...]
    mean_composite: float
    dimension_score_means: dict[str, float]
    dimension_metric_means: dict[str, float]
    mean_requests: float
    mean_api_calls: float
    mean_size_kb: float
    warnings: tuple[str, ...] = ()


EXPECTED_CAPTURES_PER_SITE = 6


def aggregate_site(
    captures: list[CaptureScore],
    category: str = "",
    architecture: str = "",
) -> SiteScore:
    """Flat means over a site's captures (every run weighs the same)."""
    if not captures:
        raise ValueError("site has no captures to aggregate")
    site_ids = {cap.site_id for cap in captures}
    if len(site_ids) > 1:
        raise MixedSites(f"captures span multiple sites: {sorted(site_ids)}")

    n = len(captures)
    warnings = []
    if n != EXPECTED_CAPTURES_PER_SITE:
        warnings.append(f"expected {EXPECTED_CAPTURES_PER_SITE} captures, found {n}")
    return SiteScore(
        site_id=captures[0].site_id,
        category=category,
        architecture=architecture,
        captures=tuple(captures),
        mean_composite=sum(cap.composite for cap in captures) / n,
        dimension_score_means={
            dim: sum(cap.dimensions[dim].score for cap in captures) / n for dim in DIMENSIONS
        },
        dimension_metric_means={
            dim: sum(cap.dimensions[dim].raw_metric for cap in captures) / n for dim in DIMENSIONS
        },
        mean_requests=sum(cap.request_count for cap in captures) / n,
        mean_api_calls=sum(cap.api_call_count for cap in captures) / n,
        mean_size_kb=sum(cap.page_size_kb for cap in captures) / n,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class ScoreSummary:
    count: int
    mean: float
    median: float
    stddev: float
    minimum: float
    maximum: float


def summarize_scores(scores: list[float]) -> ScoreSummary:
    """Descriptive statistics over site scores.

    The spread is the sample standard deviation (n - 1 denominator); a
    single score has no spread and reports 0.0.
    """
    if not scores:
        raise ValueError("no scores to summarize")
    return ScoreSummary(
        count=len(scores),
        mean=statistics.fmean(scores),
        median=statistics.median(scores),
        stddev=statistics.stdev(scores) if len(scores) >= 2 else 0.0,
        minimum=min(scores),
        maximum=max(scores),
    )
