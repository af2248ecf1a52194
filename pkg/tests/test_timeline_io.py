"""OTIO export/import: canonical bytes, golden file, schema checks, round-trip identity."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_timeline
from reelsmith.model import AudioKind, RationalTime, Timeline, TimelineClip
from reelsmith.timeline_io import (
    OtioSchemaError,
    dumps_canonical,
    export_otio,
    import_otio,
    load_otio,
    save_otio,
    validate_otio_document,
)

GOLDEN = Path(__file__).parent / "fixtures" / "golden.otio"


def golden_timeline() -> Timeline:
    """A fixed picture-lock-plus-audio timeline; the golden file freezes its export."""
    timeline = Timeline(name="golden_lock", global_rate=30)
    cursor = RationalTime(0, 30)
    for i, (frames, speed) in enumerate([(153, Fraction(1)), (153, Fraction(3, 2)), (120, Fraction(1))]):
        clip = TimelineClip(
            source=f"assets/video/scene_0_shot_{i}.clip.json",
            source_start=RationalTime(0, 30),
            source_duration_used=RationalTime(frames, 30),
            timeline_start=cursor,
            speed_factor=speed,
            source_duration=RationalTime(frames, 30),
            metadata={"shot_id": f"scene_0_shot_{i}", "scene_id": "scene_0"},
        )
        timeline.video_track.append(clip)
        cursor = clip.timeline_end()
    timeline.audio_tracks[AudioKind.AMBIENCE].append(
        TimelineClip(
            source="assets/audio/wind.wav",
            source_start=RationalTime(0, 1),
            source_duration_used=RationalTime.from_seconds(Fraction(63, 5)),
            timeline_start=RationalTime(0, 30),
            gain_db=-11.5,
            source_duration=RationalTime.from_seconds(Fraction(30)),
            metadata={
                "cue_id": "ambience_scene_0",
                "cue_kind": "ambience",
                "cue_scale": "scene",
                "filters": [
                    {
                        "type": "duck",
                        "gain_db": -6.0,
                        "attack_ms": 50.0,
                        "release_ms": 300.0,
                        "start_s": 0.0,
                        "end_s": 2.0,
                    }
                ],
                "flags": [],
            },
        )
    )
    timeline.audio_tracks[AudioKind.VOICE_OVER].append(
        TimelineClip(
            source="assets/audio/vo/line1.wav",
            source_start=RationalTime(0, 48000),
            source_duration_used=RationalTime(96000, 48000),
            timeline_start=RationalTime(60, 30),
            gain_db=-2.25,
            source_duration=RationalTime(96000, 48000),
            metadata={"cue_id": "vo_scene_0_shot_0", "cue_kind": "voice_over", "cue_scale": "shot", "filters": [], "flags": []},
        )
    )
    return timeline


class TestExport:
    def test_six_tracks_always(self):
        timeline = Timeline(name="bare", global_rate=30)
        clip = TimelineClip(
            source="v.json",
            source_start=RationalTime(0, 30),
            source_duration_used=RationalTime(30, 30),
            timeline_start=RationalTime(0, 30),
            metadata={"shot_id": "s", "scene_id": "sc"},
        )
        timeline.video_track.append(clip)
        doc = export_otio(timeline)
        tracks = doc["tracks"]["children"]
        assert len(tracks) == 6
        assert [t["name"] for t in tracks] == ["video", "ambience", "music", "voice_over", "foley", "sfx"]
        assert [t["kind"] for t in tracks] == ["Video"] + ["Audio"] * 5
        assert sum(len(t["children"]) for t in tracks[1:]) == 0

    def test_export_twice_byte_identical(self):
        a = dumps_canonical(export_otio(golden_timeline()))
        b = dumps_canonical(export_otio(golden_timeline()))
        assert a == b

    def test_golden_file(self):
        assert GOLDEN.exists(), "golden fixture missing; regenerate with scripts/make_golden_otio.py"
        assert dumps_canonical(export_otio(golden_timeline())) == GOLDEN.read_text(encoding="utf-8")

    def test_gaps_emitted_for_audio_offsets(self):
        doc = export_otio(golden_timeline())
        vo_track = doc["tracks"]["children"][3]
        assert vo_track["children"][0]["OTIO_SCHEMA"] == "Gap.1"
        gap = vo_track["children"][0]["source_range"]["duration"]
        assert gap["value"] / gap["rate"] == pytest.approx(2.0)

    def test_vendor_metadata_carried(self):
        doc = export_otio(golden_timeline())
        clip = doc["tracks"]["children"][0]["children"][1]
        vendor = clip["metadata"]["filmaster"]
        assert vendor["speed_factor"] == [3, 2]
        assert vendor["shot_id"] == "scene_0_shot_1"
        amb = doc["tracks"]["children"][1]["children"][0]["metadata"]["filmaster"]
        assert amb["filters"][0]["type"] == "duck"
        assert amb["gain_db"] == -11.5

    def test_invalid_timeline_rejected(self):
        timeline = golden_timeline()
        timeline.video_track[1].timeline_start = RationalTime(0, 30)  # overlap
        with pytest.raises(ValueError, match="invalid timeline"):
            export_otio(timeline)

    def test_media_root_relativizes(self, tmp_path):
        timeline = Timeline(name="t", global_rate=30)
        abs_path = tmp_path / "assets" / "clip.json"
        timeline.video_track.append(
            TimelineClip(
                source=str(abs_path),
                source_start=RationalTime(0, 30),
                source_duration_used=RationalTime(30, 30),
                timeline_start=RationalTime(0, 30),
                metadata={"shot_id": "s", "scene_id": "sc"},
            )
        )
        doc = export_otio(timeline, media_root=tmp_path)
        url = doc["tracks"]["children"][0]["children"][0]["media_references"]["DEFAULT_MEDIA"]["target_url"]
        assert url == "assets/clip.json"
        back = import_otio(doc, media_root=tmp_path)
        assert back.video_track[0].source == str(abs_path)


class TestImport:
    def test_round_trip_golden(self):
        timeline = golden_timeline()
        back = import_otio(export_otio(timeline))
        assert back == timeline

    def test_missing_source_range_names_clip(self):
        doc = export_otio(golden_timeline())
        doc["tracks"]["children"][0]["children"][1]["source_range"] = None
        with pytest.raises(OtioSchemaError, match=r"children\[1\].*source_range"):
            import_otio(doc)

    def test_wrong_track_count_rejected(self):
        doc = export_otio(golden_timeline())
        doc["tracks"]["children"].pop()
        with pytest.raises(OtioSchemaError, match="6 tracks"):
            import_otio(doc)

    def test_foreign_vendor_metadata_preserved(self):
        doc = export_otio(golden_timeline())
        clip = doc["tracks"]["children"][0]["children"][0]
        clip["metadata"]["acme_nle"] = {"favorite": True}
        timeline = import_otio(doc)
        assert timeline.video_track[0].metadata["_foreign_metadata"] == {"acme_nle": {"favorite": True}}
        doc2 = export_otio(timeline)
        clip2 = doc2["tracks"]["children"][0]["children"][0]
        assert clip2["metadata"]["acme_nle"] == {"favorite": True}

    def test_save_and_load(self, tmp_path):
        path = save_otio(golden_timeline(), tmp_path / "out.otio")
        timeline = load_otio(path)
        assert timeline == golden_timeline()

    def test_fractional_rational_time_rejected(self):
        doc = export_otio(golden_timeline())
        doc["tracks"]["children"][0]["children"][0]["source_range"]["duration"]["value"] = 30.5
        with pytest.raises(OtioSchemaError, match="integer"):
            import_otio(doc)


class TestSchemaValidation:
    def test_exported_document_validates(self):
        validate_otio_document(export_otio(golden_timeline()))

    def test_schema_rejects_five_tracks(self):
        doc = export_otio(golden_timeline())
        doc["tracks"]["children"].pop()
        with pytest.raises(jsonschema.ValidationError):
            validate_otio_document(doc)

    def test_schema_rejects_missing_media_reference(self):
        doc = export_otio(golden_timeline())
        del doc["tracks"]["children"][0]["children"][0]["media_references"]
        with pytest.raises(jsonschema.ValidationError):
            validate_otio_document(doc)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_round_trip_identity_property(seed):
    rng = random.Random(seed)
    timeline = random_timeline(rng)
    # decorate some clips with audio cues to cover the gap writer
    if timeline.video_track:
        end = timeline.duration().to_seconds()
        if end >= 2:
            timeline.audio_tracks[AudioKind.SFX].append(
                TimelineClip(
                    source="sfx.wav",
                    source_start=RationalTime(0, 1),
                    source_duration_used=RationalTime.from_seconds(Fraction(1)),
                    timeline_start=RationalTime.from_seconds(end - 1),
                    gain_db=-3.0,
                    metadata={"cue_id": "x", "filters": [], "flags": []},
                )
            )
    doc = export_otio(timeline)
    back = import_otio(doc)
    assert back == timeline
    assert dumps_canonical(export_otio(back)) == dumps_canonical(doc)
