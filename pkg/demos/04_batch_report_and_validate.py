"""Score a whole capture batch, write anonymized reports, re-validate.

Runs the committed 18-site fixture corpus end to end:

    python3 demos/04_batch_report_and_validate.py [output-dir]

The validation step re-reads both the raw captures and the emitted
reports and cross-checks them with eight independent checks; it shares
no intermediate state with the analysis step.
"""

import sys
import tempfile
from pathlib import Path

from haraudit import load_manifest, run_analysis, run_validation
from haraudit.validation import validation_report_document

HAR_DIR = Path("tests/fixtures/corpus")
MANIFEST = Path("tests/fixtures/corpus_manifest.json")


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="haraudit-"))
    manifest = load_manifest(MANIFEST)

    result = run_analysis(HAR_DIR, manifest, out, anonymize=True)
    print(f"analyzed {len(result.sites)} sites "
          f"({sum(len(s.captures) for s in result.sites)} captures)")
    for site in sorted(result.sites, key=lambda s: s.mean_composite):
        print(f"  {site.site_id:16s} {site.category:14s} score {site.mean_composite:6.1f}")
    print(f"\nreports under {out}/results/")

    checks = run_validation(HAR_DIR, out / "results", manifest)
    print()
    for check in checks:
        print(f"  check {check.check_id} {check.name}: {check.status}")
    print(f"\noverall: {validation_report_document(checks)['overall']}")


if __name__ == "__main__":
    main()
