"""Separate API traffic from page assets in a capture.

An entry counts as an API call when any of five heuristics fires:
JSON-ish response type, XMLHttpRequest marker, JSON Accept header,
JSON request body, or a recognizable API path segment.

    python3 demos/02_find_api_calls.py
"""

from pathlib import Path

from haraudit import api_calls, load_har_file

CAPTURE = Path("tests/fixtures/corpus/morning-herald__home__run1.har")


def main() -> None:
    capture = load_har_file(CAPTURE)
    calls = api_calls(capture)

    print(f"{len(capture.entries)} requests, {len(calls)} API calls")
    print()
    shown = set()
    for view in calls:
        if view.entry.url in shown:
            continue
        shown.add(view.entry.url)
        if len(shown) > 10:
            break
        fired = ", ".join(sorted(view.matched_heuristics))
        print(f"  {view.entry.url}")
        print(f"      matched: {fired}")

    assets = len(capture.entries) - len(calls)
    print(f"\n{assets} requests classified as page assets (HTML, CSS, JS, images)")


if __name__ == "__main__":
    main()
