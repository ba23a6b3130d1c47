"""Network-layer API quality auditing for HAR captures.

The package parses HTTP Archive files, identifies API calls among the
requests, detects eight classes of API usage anti-patterns, folds the
findings into a weighted 0-100 quality score per capture and per site,
writes anonymizable reports and independently re-validates them.
"""

from .apicalls import ApiCallView, api_calls, is_api_call
from .config import DEFAULT_THRESHOLDS, Thresholds
from .detectors import (
    DIMENSION_NAMES,
    DIMENSIONS,
    DimensionResult,
    Evidence,
    detect_all,
    normalize_path,
)
from .domains import (
    CategoryDictionary,
    PublicSuffixList,
    categorize_third_party,
    classify_party,
    registered_domain,
)
from .har import (
    HarCapture,
    HarEntry,
    HarError,
    MalformedDocument,
    MissingLog,
    load_har_file,
    parse_har,
    provenance_from_filename,
)
from .manifest import Manifest, ManifestError, SiteRecord, build_pseudonyms, load_manifest
from .pipeline import BatchResult, NoInputFiles, analyze_batch, run_analysis
from .reporting import anonymize_batch, redact_url, round1, write_site_csv, write_site_report
from .scoring import (
    CaptureScore,
    DEFAULT_WEIGHTS,
    InvalidWeights,
    MissingDimension,
    MixedSites,
    ScoreSummary,
    SiteScore,
    aggregate_site,
    clamp,
    composite_score,
    load_weights,
    normalize_weights,
    score_capture,
    summarize_scores,
    validate_weights,
)
from .validation import CheckResult, MissingOutputs, run_validation, spearman_rho

__version__ = "1.0.0"

__all__ = [
    "ApiCallView",
    "BatchResult",
    "CaptureScore",
    "CategoryDictionary",
    "CheckResult",
    "DEFAULT_THRESHOLDS",
    "DEFAULT_WEIGHTS",
    "DIMENSIONS",
    "DIMENSION_NAMES",
    "DimensionResult",
    "Evidence",
    "HarCapture",
    "HarEntry",
    "HarError",
    "InvalidWeights",
    "MalformedDocument",
    "Manifest",
    "ManifestError",
    "MissingDimension",
    "MissingLog",
    "MissingOutputs",
    "MixedSites",
    "NoInputFiles",
    "PublicSuffixList",
    "ScoreSummary",
    "SiteRecord",
    "SiteScore",
    "Thresholds",
    "aggregate_site",
    "analyze_batch",
    "anonymize_batch",
    "api_calls",
    "build_pseudonyms",
    "categorize_third_party",
    "clamp",
    "classify_party",
    "composite_score",
    "detect_all",
    "is_api_call",
    "load_har_file",
    "load_manifest",
    "load_weights",
    "normalize_path",
    "normalize_weights",
    "parse_har",
    "provenance_from_filename",
    "redact_url",
    "registered_domain",
    "round1",
    "run_analysis",
    "run_validation",
    "score_capture",
    "spearman_rho",
    "summarize_scores",
    "validate_weights",
    "write_site_csv",
    "write_site_report",
]
