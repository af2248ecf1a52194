#!/usr/bin/env python3
"""Generate a synthetic film-reference corpus and audio library at a chosen scale.

Stand-ins for the (proprietary) production datasets, in the documented JSONL
schemas. Descriptions are assembled from camera-language vocabulary so
retrieval has real structure to work with.

    python scripts/make_synthetic_corpus.py out/ --clips 5000 --assets 200
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))

MOVES = ["slow dolly-in", "crane descent", "handheld drift", "lateral tracking", "whip pan", "static hold", "slow push-in"]
FRAMINGS = ["extreme wide", "wide", "medium", "close-up", "extreme close-up", "insert"]
ANGLES = ["eye level", "low angle", "high angle", "over-the-shoulder", "top-down"]
SUBJECTS = ["a solitary figure", "two people mid-argument", "a crowded platform", "an empty corridor", "hands at work", "a distant skyline"]
LIGHT = ["at dusk", "under hard noon light", "in cold blue night", "in warm practical light", "at first light"]
MOODS = ["melancholy stillness", "rising tension", "quiet resolve", "uneasy calm", "open wonder"]

AUDIO_KINDS = {
    "ambience": (["wind bed", "room tone", "rain on glass", "sea wash", "crowd murmur"], 45.0),
    "music": (["minor underscore", "warm swell", "pulse bed", "sparse piano", "string drone"], 45.0),
    "foley": (["footsteps on gravel", "cloth rustle", "cup set down", "door latch", "page turn"], 2.0),
    "sfx": (["thunder roll", "sharp gust", "glass chime", "engine pass", "metal groan"], 2.5),
}


def write_corpus(path: Path, count: int, seed: int) -> None:
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(count):
            desc = (
                f"{rng.choice(MOVES)} on {rng.choice(SUBJECTS)} {rng.choice(LIGHT)}, "
                f"{rng.choice(FRAMINGS)} framing, {rng.choice(ANGLES)}, {rng.choice(MOODS)}"
            )
            fh.write(json.dumps({"clip_id": f"clip_{i:06d}", "description": desc}) + "\n")


def write_audio_library(path: Path, count: int, seed: int) -> None:
    from reelsmith.sound.wavio import write_wav
    import numpy as np

    rng = random.Random(seed)
    audio_dir = path.parent / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    kinds = list(AUDIO_KINDS)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(count):
            kind = kinds[i % len(kinds)]
            names, seconds = AUDIO_KINDS[kind]
            name = rng.choice(names)
            wav = audio_dir / f"{kind}_{i:05d}.wav"
            gen = np.random.default_rng(seed * 1_000_003 + i)
            n = int(44100 * seconds)
            if kind in ("ambience", "foley", "sfx"):
                signal = 0.1 * gen.standard_normal(n)
            else:
                t = np.arange(n) / 44100
                f = 150 + 30 * (i % 12)
                signal = 0.15 * (np.sin(2 * np.pi * f * t) + 0.4 * np.sin(2 * np.pi * 1.5 * f * t))
            write_wav(wav, signal, 44100)
            fh.write(
                json.dumps(
                    {
                        "asset_id": f"{kind}_{i:05d}",
                        "kind": kind,
                        "description": f"{name}, variation {i}",
                        "tags": name.split(),
                        "emotions": [rng.choice(["calm", "tense", "open", "grave"])],
                        "acoustics": [rng.choice(["dry", "airy", "boomy", "close"])],
                        "path": f"audio/{wav.name}",
                    }
                )
                + "\n"
            )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=Path)
    parser.add_argument("--clips", type=int, default=2000)
    parser.add_argument("--assets", type=int, default=40)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    write_corpus(args.out / "corpus.jsonl", args.clips, args.seed)
    write_audio_library(args.out / "audio_library.jsonl", args.assets, args.seed)
    print(args.out / "corpus.jsonl")
    print(args.out / "audio_library.jsonl")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
