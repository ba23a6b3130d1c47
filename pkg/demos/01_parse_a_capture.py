"""Parse one HAR file and look at what came off the wire.

Run from the repository root:

    python3 demos/01_parse_a_capture.py [path/to/capture.har]
"""

import sys
from pathlib import Path

from haraudit import load_har_file

DEFAULT = Path("tests/fixtures/golden/errors-20pct__home__run1.har")


def main() -> None:
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT
    capture = load_har_file(path)

    print(f"capture   {capture.provenance}")
    print(f"entries   {len(capture.entries)}")
    for warning in capture.warnings:
        print(f"warning   {warning}")
    print()

    for entry in capture.entries:
        size = "?" if entry.body_size < 0 else f"{entry.body_size}B"
        print(f"  {entry.method:4s} {entry.status:3d} {size:>8s}  {entry.url}")

    # Captures recorded headers-only still parse; body sizes fall back to
    # the content record and unknown sizes stay -1 instead of guessing.


if __name__ == "__main__":
    main()
