#!/usr/bin/env python3
"""End-to-end offline demo: init the bundled fixture project, run every stage,
score the first generated clip, and print where the .otio landed.

    python scripts/run_demo.py /tmp/reelsmith-demo
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))
sys.path.insert(0, str(REPO_ROOT / "scripts"))

import make_fixture_media  # noqa: E402

from reelsmith.cli import main as cli_main  # noqa: E402

FIXTURES = REPO_ROOT / "tests" / "fixtures"


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    root = Path(sys.argv[1])
    make_fixture_media.ensure_audio_assets(FIXTURES / "audio")
    rc = cli_main(
        [
            "init",
            str(root),
            "--theme",
            str(FIXTURES / "theme.txt"),
            "--char",
            f"Mara={FIXTURES / 'mara.png'}",
            "--char",
            f"Theo={FIXTURES / 'theo.png'}",
            "--loc",
            f"the lighthouse={FIXTURES / 'lighthouse.png'}",
            "--audience",
            "short-drama audience",
        ]
    )
    if rc != 0:
        return rc
    config_path = root / "config.json"
    config = json.loads(config_path.read_text())
    config["corpus_path"] = str(FIXTURES / "corpus.jsonl")
    config["audio_library_path"] = str(FIXTURES / "audio_library.jsonl")
    config_path.write_text(json.dumps(config, indent=2, sort_keys=True))
    rc = cli_main(["run", "--project", str(root), "--offline"])
    if rc != 0:
        return rc
    clips = sorted((root / "assets" / "video").glob("scene_*"))
    if clips:
        print("\nscoring the first generated clip:")
        cli_main(["eval", str(clips[0])])
    print(f"\nexport: {root / 'exports' / 'film.otio'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
