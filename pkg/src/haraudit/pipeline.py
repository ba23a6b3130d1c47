"""Batch analysis: HAR directory + manifest in, report tree out.

Output layout under the chosen output directory:

    results/quality_scores.csv    one row per site, ascending by score
    results/summary_stats.csv     per-column summary statistics
    results/sites/<label>.json    per-site report with capture breakdowns
    results/weights.json          the weight vector the batch was scored with
    data/sites_anonymized.json    redacted manifest (anonymized runs only)

Per-file parse failures are isolated: the file is recorded under errors
and the rest of the batch proceeds. A site is scored only when the
manifest knows it; unmanifested capture files are reported and skipped,
because third-party classification needs the site's first-party domain.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import DEFAULT_THRESHOLDS, Thresholds
from .domains import CategoryDictionary, default_category_dictionary
from .har import HarError, load_har_file, provenance_from_filename
from .manifest import Manifest
from .reporting import (
    anonymize_batch,
    anonymized_manifest_records,
    write_json,
    write_site_csv,
    write_site_report,
    write_summary_csv,
)
from .scoring import (
    CaptureScore,
    DEFAULT_WEIGHTS,
    SiteScore,
    aggregate_site,
    score_capture,
    validate_weights,
)


class NoInputFiles(FileNotFoundError):
    """Raised when the HAR directory holds no capture files at all."""


@dataclass(frozen=True)
class BatchResult:
    sites: tuple[SiteScore, ...]
    parse_errors: tuple[tuple[str, str], ...]
    skipped: tuple[str, ...]
    output_dir: Path
    anonymized: bool

    @property
    def all_failed(self) -> bool:
        return not self.sites and bool(self.parse_errors)


@dataclass(frozen=True)
class _FileTask:
    path: Path
    site_domain: str
    weights: dict[str, float] | None
    thresholds: Thresholds
    dictionary: CategoryDictionary | None


def _score_file(task: _FileTask) -> tuple[str, object]:
    try:
        capture = load_har_file(task.path)
        score = score_capture(
            capture,
            task.site_domain,
            weights=task.weights,
            thresholds=task.thresholds,
            dictionary=task.dictionary,
        )
        return ("ok", score)
    except HarError as exc:
        return ("err", f"{exc}")


def discover_har_files(har_dir: str | Path) -> list[Path]:
    har_dir = Path(har_dir)
    if not har_dir.is_dir():
        raise NoInputFiles(f"HAR directory {har_dir} does not exist")
    files = sorted(p for p in har_dir.rglob("*.har") if p.is_file())
    if not files:
        raise NoInputFiles(f"no .har files under {har_dir}")
    return files


def analyze_batch(
    har_dir: str | Path,
    manifest: Manifest,
    weights: dict[str, float] | None = None,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    dictionary: CategoryDictionary | None = None,
    jobs: int = 1,
) -> tuple[list[SiteScore], list[tuple[str, str]], list[str]]:
    """Parse and score every capture, grouped and aggregated per site.

    Returns (site scores in manifest order, parse errors, skip notices).
    """
    files = discover_har_files(har_dir)

    tasks: list[tuple[Path, _FileTask]] = []
    parse_errors: list[tuple[str, str]] = []
    skipped: list[str] = []
    for path in files:
        site_id, _, _ = provenance_from_filename(path.name)
        record = manifest.get(site_id)
        if record is None:
            skipped.append(f"{path.name}: site {site_id!r} not in manifest")
            continue
        if record.excluded:
            skipped.append(f"{path.name}: site excluded ({record.exclusion})")
            continue
        tasks.append((path, _FileTask(path, record.domain, weights, thresholds, dictionary)))

    by_site: dict[str, list[CaptureScore]] = {}
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_score_file, [t for _, t in tasks]))
    else:
        outcomes = [_score_file(t) for _, t in tasks]

    for (path, _), outcome in zip(tasks, outcomes):
        if outcome[0] == "ok":
            score = outcome[1]
            by_site.setdefault(score.site_id, []).append(score)
        else:
            parse_errors.append((path.name, str(outcome[1])))

    sites: list[SiteScore] = []
    for record in manifest.included_sites():
        captures = by_site.get(record.site_id)
        if not captures:
            skipped.append(f"site {record.site_id!r}: no parseable captures found")
            continue
        captures.sort(key=lambda c: (c.page_id, c.run_index))
        sites.append(aggregate_site(captures, record.category, record.architecture))
    return sites, parse_errors, skipped


def run_analysis(
    har_dir: str | Path,
    manifest: Manifest,
    output_dir: str | Path,
    anonymize: bool = False,
    weights: dict[str, float] | None = None,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    dictionary: CategoryDictionary | None = None,
    jobs: int = 1,
) -> BatchResult:
    """Analyze a batch and write the full report tree."""
    sites, parse_errors, skipped = analyze_batch(
        har_dir, manifest, weights, thresholds, dictionary, jobs
    )
    output_dir = Path(output_dir)
    results_dir = output_dir / "results"

    if anonymize:
        published = anonymize_batch(sites, manifest, dictionary)
    else:
        published = sites

    if published:
        write_site_csv(published, results_dir / "quality_scores.csv")
        write_summary_csv(published, results_dir / "summary_stats.csv")
        for site in published:
            write_site_report(site, results_dir / "sites" / f"{site.site_id}.json")

    active_weights = validate_weights(weights) if weights is not None else dict(DEFAULT_WEIGHTS)
    write_json(active_weights, results_dir / "weights.json")

    if anonymize:
        write_json(anonymized_manifest_records(manifest), output_dir / "data" / "sites_anonymized.json")

    return BatchResult(
        sites=tuple(published),
        parse_errors=tuple(parse_errors),
        skipped=tuple(skipped),
        output_dir=output_dir,
        anonymized=anonymize,
    )
