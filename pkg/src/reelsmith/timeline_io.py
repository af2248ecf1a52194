"""Bit-exact export/import of the project timeline as multi-track OTIO JSON.

The document is one Timeline with a fixed six-track stack (video, then
ambience/music/voice_over/foley/sfx), external media references with relative
target urls, and clip-level vendor metadata under the `filmaster` namespace
(speed_factor, gain_db, filters, ids, flags). Serialization is canonical:
sorted keys, two-space indent, floats in shortest round-trip form, so
structurally equal timelines yield byte-identical files.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import jsonschema

from .model import (
    AUDIO_TRACK_ORDER,
    RationalTime,
    Timeline,
    TimelineClip,
    validate_timeline,
)

VENDOR_NS = "filmaster"
MEDIA_KEY = "DEFAULT_MEDIA"


class OtioSchemaError(ValueError):
    """Document structure violates the expected OTIO shape; message carries a path."""


def _rt(value: RationalTime) -> dict[str, Any]:
    return {"OTIO_SCHEMA": "RationalTime.1", "rate": float(value.rate), "value": float(value.value)}


def _time_range(start: RationalTime, duration: RationalTime) -> dict[str, Any]:
    return {"OTIO_SCHEMA": "TimeRange.1", "duration": _rt(duration), "start_time": _rt(start)}


def _relativize(source: str, media_root: Optional[Path]) -> str:
    """Relative url when the source lives under the project root, else unchanged."""
    if media_root is None:
        return source
    try:
        return str(Path(source).relative_to(media_root))
    except ValueError:
        return source


def _clip_to_otio(clip: TimelineClip, media_root: Optional[Path]) -> dict[str, Any]:
    vendor: dict[str, Any] = {
        "speed_factor": [clip.speed_factor.numerator, clip.speed_factor.denominator],
        "gain_db": clip.gain_db,
        "filters": clip.metadata.get("filters", []),
    }
    for key, value in sorted(clip.metadata.items()):
        if key != "filters":
            vendor[key] = value
    metadata = {VENDOR_NS: vendor}
    foreign = clip.metadata.get("_foreign_metadata")
    if isinstance(foreign, dict):
        vendor.pop("_foreign_metadata", None)
        for key, value in foreign.items():
            metadata[key] = value
    available = None
    if clip.source_duration is not None:
        available = _time_range(RationalTime(0, clip.source_duration.rate), clip.source_duration)
    name = clip.shot_id() or clip.metadata.get("cue_id") or Path(clip.source).name
    url = _relativize(clip.source, media_root)
    return {
        "OTIO_SCHEMA": "Clip.2",
        "active_media_reference_key": MEDIA_KEY,
        "enabled": True,
        "effects": [],
        "markers": [],
        "media_references": {
            MEDIA_KEY: {
                "OTIO_SCHEMA": "ExternalReference.1",
                "available_range": available,
                "metadata": {},
                "name": Path(clip.source).name,
                "target_url": url,
            }
        },
        "metadata": metadata,
        "name": name,
        "source_range": _time_range(clip.source_start, clip.source_duration_used),
    }


def _gap(duration_s: Fraction, rate: int) -> dict[str, Any]:
    duration = RationalTime.from_seconds(duration_s)
    return {
        "OTIO_SCHEMA": "Gap.1",
        "enabled": True,
        "effects": [],
        "markers": [],
        "metadata": {},
        "name": "gap",
        "source_range": _time_range(RationalTime(0, duration.rate), duration),
    }


def _track(name: str, kind: str, children: list[dict[str, Any]]) -> dict[str, Any]:
    return {
        "OTIO_SCHEMA": "Track.1",
        "children": children,
        "enabled": True,
        "kind": kind,
        "markers": [],
        "metadata": {},
        "name": name,
        "source_range": None,
    }


def export_otio(
    timeline: Timeline,
    project_meta: Optional[dict[str, Any]] = None,
    media_root: Optional[Path] = None,
) -> dict[str, Any]:
    """Render the timeline as an OTIO JSON document (as a plain dict)."""
    violations = validate_timeline(timeline)
    if violations:
        raise ValueError(f"cannot export invalid timeline: {violations}")
    video_children = [_clip_to_otio(c, media_root) for c in timeline.video_track]
    tracks = [_track("video", "Video", video_children)]
    for kind in AUDIO_TRACK_ORDER:
        children: list[dict[str, Any]] = []
        cursor = Fraction(0)
        for clip in timeline.audio_tracks.get(kind, []):
            start = clip.timeline_start.to_seconds()
            if start > cursor:
                children.append(_gap(start - cursor, timeline.global_rate))
            children.append(_clip_to_otio(clip, media_root))
            cursor = clip.timeline_end().to_seconds()
        tracks.append(_track(kind.value, "Audio", children))
    vendor_meta: dict[str, Any] = {"global_rate": timeline.global_rate}
    if project_meta:
        vendor_meta.update(project_meta)
    return {
        "OTIO_SCHEMA": "Timeline.1",
        "global_start_time": _rt(RationalTime(0, timeline.global_rate)),
        "metadata": {VENDOR_NS: vendor_meta},
        "name": timeline.name,
        "tracks": {
            "OTIO_SCHEMA": "Stack.1",
            "children": tracks,
            "enabled": True,
            "markers": [],
            "metadata": {},
            "name": "tracks",
            "source_range": None,
        },
    }


def dumps_canonical(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_otio(
    timeline: Timeline,
    path: Path,
    project_meta: Optional[dict[str, Any]] = None,
    media_root: Optional[Path] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_canonical(export_otio(timeline, project_meta, media_root)), encoding="utf-8")
    return path


# -- import ---------------------------------------------------------------------


def _expect(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise OtioSchemaError(f"{path}: {message}")


def _parse_rt(node: Any, path: str) -> RationalTime:
    _expect(isinstance(node, dict), path, "expected a RationalTime object")
    _expect(node.get("OTIO_SCHEMA") == "RationalTime.1", path, "not a RationalTime.1")
    rate, value = node.get("rate"), node.get("value")
    _expect(isinstance(rate, (int, float)) and float(rate).is_integer() and rate > 0, path, "rate must be a positive integer")
    _expect(isinstance(value, (int, float)) and float(value).is_integer(), path, "value must be an integer")
    return RationalTime(int(value), int(rate))


def _parse_range(node: Any, path: str) -> tuple[RationalTime, RationalTime]:
    _expect(isinstance(node, dict), path, "expected a TimeRange object")
    _expect(node.get("OTIO_SCHEMA") == "TimeRange.1", path, "not a TimeRange.1")
    return _parse_rt(node.get("start_time"), f"{path}.start_time"), _parse_rt(
        node.get("duration"), f"{path}.duration"
    )


def _clip_from_otio(node: dict[str, Any], cursor: Fraction, path: str, media_root: Optional[Path]) -> TimelineClip:
    _expect("source_range" in node and node["source_range"] is not None, path, "clip missing source_range")
    source_start, source_duration_used = _parse_range(node["source_range"], f"{path}.source_range")
    refs = node.get("media_references") or {}
    key = node.get("active_media_reference_key", MEDIA_KEY)
    _expect(key in refs, path, f"missing media reference {key!r}")
    ref = refs[key]
    url = ref.get("target_url", "")
    _expect(isinstance(url, str) and url != "", f"{path}.media_references", "missing target_url")
    source = url
    if media_root is not None and not os.path.isabs(url):
        source = str(Path(media_root) / url)
    available = ref.get("available_range")
    source_duration = None
    if available is not None:
        _, source_duration = _parse_range(available, f"{path}.available_range")
    raw_meta = node.get("metadata") or {}
    vendor = dict(raw_meta.get(VENDOR_NS) or {})
    num, den = vendor.pop("speed_factor", [1, 1])
    gain_db = vendor.pop("gain_db", None)
    metadata = dict(vendor)
    foreign = {k: v for k, v in raw_meta.items() if k != VENDOR_NS}
    if foreign:
        metadata["_foreign_metadata"] = foreign
    return TimelineClip(
        source=source,
        source_start=source_start,
        source_duration_used=source_duration_used,
        timeline_start=RationalTime.from_seconds(cursor),
        speed_factor=Fraction(num, den),
        gain_db=gain_db,
        source_duration=source_duration,
        metadata=metadata,
    )


def import_otio(doc: dict[str, Any], media_root: Optional[Path] = None) -> Timeline:
    """Rebuild a Timeline from a document produced by export_otio (or shaped like one)."""
    _expect(doc.get("OTIO_SCHEMA") == "Timeline.1", "$", "not an OTIO Timeline.1 document")
    stack = doc.get("tracks")
    _expect(isinstance(stack, dict) and stack.get("OTIO_SCHEMA") == "Stack.1", "$.tracks", "missing Stack.1")
    children = stack.get("children")
    _expect(isinstance(children, list) and len(children) == 1 + len(AUDIO_TRACK_ORDER), "$.tracks.children", "expected 6 tracks")
    vendor = (doc.get("metadata") or {}).get(VENDOR_NS) or {}
    rate = vendor.get("global_rate")
    if rate is None:
        rate = int(_parse_rt(doc["global_start_time"], "$.global_start_time").rate)
    timeline = Timeline(name=doc.get("name", "timeline"), global_rate=int(rate))

    video = children[0]
    _expect(video.get("kind") == "Video", "$.tracks.children[0]", "first track must be Video")
    cursor = Fraction(0)
    for i, item in enumerate(video.get("children", [])):
        path = f"$.tracks.children[0].children[{i}]"
        _expect(item.get("OTIO_SCHEMA") == "Clip.2", path, "video track admits only Clip.2 items")
        clip = _clip_from_otio(item, cursor, path, media_root)
        timeline.video_track.append(clip)
        cursor = clip.timeline_end().to_seconds()

    for t, kind in enumerate(AUDIO_TRACK_ORDER, start=1):
        track = children[t]
        track_path = f"$.tracks.children[{t}]"
        _expect(track.get("kind") == "Audio", track_path, "expected an Audio track")
        _expect(track.get("name") == kind.value, track_path, f"expected track name {kind.value!r}")
        cursor = Fraction(0)
        for i, item in enumerate(track.get("children", [])):
            path = f"{track_path}.children[{i}]"
            schema_name = item.get("OTIO_SCHEMA")
            if schema_name == "Gap.1":
                _, duration = _parse_range(item.get("source_range"), f"{path}.source_range")
                cursor += duration.to_seconds()
            elif schema_name == "Clip.2":
                clip = _clip_from_otio(item, cursor, path, media_root)
                timeline.audio_tracks[kind].append(clip)
                cursor = clip.timeline_end().to_seconds()
            else:
                raise OtioSchemaError(f"{path}: unsupported item {schema_name!r}")
    violations = validate_timeline(timeline)
    if violations:
        raise OtioSchemaError(f"imported timeline violates invariants: {violations}")
    return timeline


def load_otio(path: Path, media_root: Optional[Path] = None) -> Timeline:
    return import_otio(json.loads(Path(path).read_text(encoding="utf-8")), media_root)


def otio_json_schema() -> dict[str, Any]:
    text = resources.files(__package__).joinpath("otio_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_otio_document(doc: dict[str, Any]) -> None:
    """Structural validation against the bundled OTIO JSON schema."""
    jsonschema.validate(doc, otio_json_schema())
