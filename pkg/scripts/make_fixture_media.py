#!/usr/bin/env python3
"""Generate the binary fixture media: reference PNGs and the audio-asset WAVs.

Everything is deterministic, so regenerating produces identical bytes. The
PNGs are tiny and committed; the WAVs are larger and built on demand into
tests/fixtures/audio/ (ignored by git). Run directly to (re)build both:

    python scripts/make_fixture_media.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "tests" / "fixtures"

REFERENCE_IMAGES = {
    "mara.png": (188, 52, 46),
    "theo.png": (46, 88, 186),
    "lighthouse.png": (224, 206, 92),
}

# (filename, kind, seconds, renderer, base frequency or None)
AUDIO_ASSETS = [
    ("wind_bed.wav", "noise", 45.0, 0.08, 11),
    ("surf_room.wav", "noise", 45.0, 0.06, 23),
    ("underscore_minor.wav", "tone", 45.0, 0.18, 196.0),
    ("underscore_swell.wav", "tone", 45.0, 0.16, 262.0),
    ("steps_gravel.wav", "noise", 2.0, 0.2, 31),
    ("cloth_rustle.wav", "noise", 1.5, 0.15, 47),
    ("thunder_far.wav", "tone", 3.0, 0.3, 55.0),
    ("gust_sharp.wav", "noise", 2.0, 0.25, 59),
]

SAMPLE_RATE = 44100


def make_reference_images(out_dir: Path) -> list[Path]:
    from PIL import Image

    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, color in REFERENCE_IMAGES.items():
        path = out_dir / name
        Image.new("RGB", (8, 8), color).save(path)
        paths.append(path)
    return paths


def _render(kind: str, seconds: float, amp: float, param) -> np.ndarray:
    n = int(seconds * SAMPLE_RATE)
    if kind == "noise":
        rng = np.random.default_rng(param)
        return amp * rng.standard_normal(n)
    t = np.arange(n) / SAMPLE_RATE
    # two detuned partials so the underscore beds are not pure sines
    return amp * (np.sin(2 * np.pi * param * t) + 0.4 * np.sin(2 * np.pi * param * 1.5 * t))


def ensure_audio_assets(out_dir: Path) -> list[Path]:
    """Idempotent: renders any missing WAV; existing files are left alone."""
    sys.path.insert(0, str(REPO_ROOT / "src"))
    from reelsmith.sound.wavio import write_wav

    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, kind, seconds, amp, param in AUDIO_ASSETS:
        path = out_dir / name
        if not path.exists():
            write_wav(path, _render(kind, seconds, amp, param), SAMPLE_RATE)
        paths.append(path)
    return paths


def main() -> int:
    images = make_reference_images(FIXTURES)
    wavs = ensure_audio_assets(FIXTURES / "audio")
    for path in images + wavs:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
