"""Searchable audio-asset library: per-kind vector indexes over descriptions and tags."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..camera_rag import RetrievalResult, VectorIndex, build_index, load_index, retrieve, save_index
from ..model import AudioKind

# Voice-over is synthesized, never retrieved.
LIBRARY_KINDS = (AudioKind.AMBIENCE, AudioKind.MUSIC, AudioKind.FOLEY, AudioKind.SFX)


@dataclass
class AudioAsset:
    asset_id: str
    kind: AudioKind
    description: str
    media_path: str
    duration_seconds: float
    tags: list[str] = field(default_factory=list)
    emotions: list[str] = field(default_factory=list)
    acoustics: list[str] = field(default_factory=list)

    def index_text(self) -> str:
        fields = [self.description] + self.tags + self.emotions + self.acoustics
        return "; ".join(x for x in fields if x)


@dataclass
class AudioLibrary:
    assets: dict[str, AudioAsset]
    indexes: dict[AudioKind, VectorIndex]

    def search(self, kind: AudioKind, query: str, embedder: Any, k: int = 3) -> RetrievalResult:
        """Top-k within one kind partition; empty partitions yield no hits."""
        index = self.indexes.get(kind)
        if index is None or not index.entries:
            return RetrievalResult(query=query, hits=[])
        return retrieve(index, query, embedder, k)

    def asset(self, asset_id: str) -> AudioAsset:
        return self.assets[asset_id]


def build_audio_library(records: list[AudioAsset], embedder: Any, model_name: str = "mock") -> AudioLibrary:
    """Index assets per kind; ids must be unique and files must exist."""
    seen: set[str] = set()
    for rec in records:
        if rec.asset_id in seen:
            raise ValueError(f"duplicate asset_id {rec.asset_id!r}")
        seen.add(rec.asset_id)
        if rec.kind == AudioKind.VOICE_OVER:
            raise ValueError(f"asset {rec.asset_id}: voice_over assets are synthesized, not indexed")
        if not Path(rec.media_path).exists():
            raise FileNotFoundError(f"asset {rec.asset_id}: missing file {rec.media_path}")
        if rec.duration_seconds <= 0:
            raise ValueError(f"asset {rec.asset_id}: non-positive duration")
    indexes: dict[AudioKind, VectorIndex] = {}
    for kind in LIBRARY_KINDS:
        subset = [r for r in records if r.kind == kind]
        if subset:
            indexes[kind] = build_index(
                [(r.asset_id, r.index_text()) for r in subset], embedder, model_name=model_name
            )
    return AudioLibrary(assets={r.asset_id: r for r in records}, indexes=indexes)


def read_audio_library_jsonl(path: Path, base_dir: Optional[Path] = None) -> list[AudioAsset]:
    """Ingestion format: one JSON object per line.

    {"asset_id", "kind", "description", "tags": [], "emotions": [],
     "acoustics": [], "path", "duration_seconds"?}
    Relative paths resolve against `base_dir` (default: the JSONL's directory).
    Duration falls back to the WAV header when omitted.
    """
    from .wavio import wav_duration_seconds

    base = Path(base_dir) if base_dir is not None else Path(path).parent
    records: list[AudioAsset] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            row = json.loads(line)
            try:
                media = Path(row["path"])
                if not media.is_absolute():
                    media = base / media
                duration = row.get("duration_seconds")
                if duration is None and media.exists():
                    duration = wav_duration_seconds(media)
                records.append(
                    AudioAsset(
                        asset_id=row["asset_id"],
                        kind=AudioKind(row["kind"]),
                        description=row["description"],
                        media_path=str(media),
                        duration_seconds=float(duration if duration is not None else 0.0),
                        tags=list(row.get("tags", [])),
                        emotions=list(row.get("emotions", [])),
                        acoustics=list(row.get("acoustics", [])),
                    )
                )
            except KeyError as err:
                raise ValueError(f"{path}:{lineno}: missing field {err}") from err
    return records


def save_audio_library(library: AudioLibrary, path: Path) -> None:
    doc = {
        "assets": [
            {
                "asset_id": a.asset_id,
                "kind": a.kind.value,
                "description": a.description,
                "media_path": a.media_path,
                "duration_seconds": a.duration_seconds,
                "tags": a.tags,
                "emotions": a.emotions,
                "acoustics": a.acoustics,
            }
            for a in library.assets.values()
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, ensure_ascii=False), encoding="utf-8")
    for kind, index in library.indexes.items():
        save_index(index, path.with_suffix(f".{kind.value}.idx.json"))


def load_audio_library(path: Path) -> AudioLibrary:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    assets = {
        row["asset_id"]: AudioAsset(
            asset_id=row["asset_id"],
            kind=AudioKind(row["kind"]),
            description=row["description"],
            media_path=row["media_path"],
            duration_seconds=row["duration_seconds"],
            tags=list(row.get("tags", [])),
            emotions=list(row.get("emotions", [])),
            acoustics=list(row.get("acoustics", [])),
        )
        for row in doc["assets"]
    }
    indexes: dict[AudioKind, VectorIndex] = {}
    for kind in LIBRARY_KINDS:
        idx_path = Path(path).with_suffix(f".{kind.value}.idx.json")
        if idx_path.exists():
            indexes[kind] = load_index(idx_path)
    return AudioLibrary(assets=assets, indexes=indexes)
