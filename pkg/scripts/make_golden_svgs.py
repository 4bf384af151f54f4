#!/usr/bin/env python3
"""Regenerate the golden SVG files for the rendering determinism tests.

The five fixture trees live in tests/fixtures/*.dltree; this script renders
each one with default options and writes tests/fixtures/golden/<name>.svg.
Run it only when the canonical rendering style intentionally changes, and
review the SVG diffs before committing.
"""

from pathlib import Path

from dlview.ingest import parse_dltree
from dlview.layout import build_layout
from dlview.render import render_svg

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> None:
    golden = FIXTURES / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    for path in sorted(FIXTURES.glob("*.dltree")):
        tree = parse_dltree(path.read_bytes())
        svg = render_svg(build_layout(tree))
        out = golden / (path.stem + ".svg")
        out.write_bytes(svg)
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
