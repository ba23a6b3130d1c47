"""Run all eight anti-pattern detectors on a capture and score it.

    python3 demos/03_detect_and_score.py
"""

from pathlib import Path

from haraudit import DIMENSION_NAMES, load_har_file, score_capture

CAPTURE = Path("tests/fixtures/golden/redundant-two-excess__home__run1.har")
DOMAIN = "golden-site.test"


def main() -> None:
    capture = load_har_file(CAPTURE)
    score = score_capture(capture, DOMAIN)

    print(f"capture    {capture.provenance}")
    print(f"requests   {score.request_count}  (API calls: {score.api_call_count})")
    print()
    for dim, result in score.dimensions.items():
        print(f"  {dim} {DIMENSION_NAMES[dim]:24s} score {result.score:6.1f}"
              f"   metric {result.raw_metric:g}")
        for item in result.evidence[:3]:
            print(f"        {item.description}")
            for url in item.urls[:2]:
                print(f"          {url}")
    print()
    print(f"composite quality score: {score.composite:.1f}")


if __name__ == "__main__":
    main()
