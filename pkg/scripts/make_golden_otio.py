#!/usr/bin/env python3
"""Regenerate tests/fixtures/golden.otio from the frozen golden timeline construction."""

from __future__ import annotations

import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))
sys.path.insert(0, str(REPO_ROOT / "tests"))


def main() -> int:
    from test_timeline_io import golden_timeline

    from reelsmith.timeline_io import dumps_canonical, export_otio

    out = REPO_ROOT / "tests" / "fixtures" / "golden.otio"
    out.write_text(dumps_canonical(export_otio(golden_timeline())), encoding="utf-8")
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
