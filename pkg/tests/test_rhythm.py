"""Rough cut assembly, audience review flow, and the exact edit-plan machinery."""

from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_plan, random_timeline
from reelsmith.model import (
    AudioKind,
    GeneratedClip,
    RationalTime,
    SceneBlock,
    ShotSpec,
    Timeline,
    validate_timeline,
)
from reelsmith.providers.base import ChatProvider, MalformedOutput, ProviderUnavailable
from reelsmith.providers.mock import MockChat, MockMediaReview, MockSearch, MockVideo, MockVoice
from reelsmith.rhythm import (
    Accelerate,
    EditPlan,
    Remove,
    ReorderScenes,
    ReorderShots,
    Retain,
    ReviewReport,
    Trim,
    apply_edit_plan,
    assemble_rough_cut,
    build_audience_profile,
    plan_fine_cut,
    render_preview,
    review_rough_cut,
    shots_by_scene,
)


def fixture_blocks() -> list[SceneBlock]:
    blocks = []
    shape = [3, 2]
    for i, count in enumerate(shape):
        shots = [
            ShotSpec(id=f"scene_{i}_shot_{j}", scene_id=f"scene_{i}", content_prompt=f"shot {i}.{j}")
            for j in range(count)
        ]
        blocks.append(
            SceneBlock(
                id=f"scene_{i}",
                index=i,
                shot_prompts=shots,
                narrative_objective=f"objective {i}",
                rough_sound_note="low wind and surf" if i == 0 else "clock ticking indoors",
            )
        )
    return blocks


def fixture_clips(tmp_path, blocks) -> list[GeneratedClip]:
    video = MockVideo(tmp_path / "media", seed=0)
    clips = []
    for block in blocks:
        for shot in block.shot_prompts:
            raw = video.generate_video(f"prompt {shot.id}", [], 5.1)
            clips.append(
                GeneratedClip(
                    shot_id=shot.id,
                    media_path=raw.media_path,
                    frame_count=raw.frame_count,
                    frame_rate=raw.frame_rate,
                )
            )
    return clips


class TestRoughCut:
    def test_two_scene_fixture_assembles_gapless(self, tmp_path):
        blocks = fixture_blocks()
        clips = fixture_clips(tmp_path, blocks)
        timeline = assemble_rough_cut(clips, blocks, MockVoice(tmp_path / "vo", seed=0))
        assert len(timeline.video_track) == 5
        assert validate_timeline(timeline) == []
        total = sum((c.effective_duration().to_seconds() for c in timeline.video_track), Fraction(0))
        assert timeline.duration().to_seconds() == total

    def test_vo_placeholder_per_scene(self, tmp_path):
        blocks = fixture_blocks()
        clips = fixture_clips(tmp_path, blocks)
        timeline = assemble_rough_cut(clips, blocks, MockVoice(tmp_path / "vo", seed=0))
        vo = timeline.audio_tracks[AudioKind.VOICE_OVER]
        assert len(vo) == 2
        scene_intervals = timeline.scene_intervals()
        for clip, scene_id in zip(vo, ("scene_0", "scene_1")):
            assert clip.timeline_start.to_seconds() == scene_intervals[scene_id][0]

    def test_missing_clip_rejected(self, tmp_path):
        blocks = fixture_blocks()
        clips = fixture_clips(tmp_path, blocks)[:-1]
        with pytest.raises(ValueError, match="scene_1_shot_1"):
            assemble_rough_cut(clips, blocks, MockVoice(tmp_path / "vo", seed=0))

    def test_other_audio_tracks_empty(self, tmp_path):
        blocks = fixture_blocks()
        clips = fixture_clips(tmp_path, blocks)
        timeline = assemble_rough_cut(clips, blocks, MockVoice(tmp_path / "vo", seed=0))
        for kind in (AudioKind.AMBIENCE, AudioKind.MUSIC, AudioKind.FOLEY, AudioKind.SFX):
            assert timeline.audio_tracks[kind] == []


class TestAudienceProfile:
    def test_profile_from_search(self):
        profile = build_audience_profile("short-drama audience", MockChat(seed=0), MockSearch(seed=0))
        assert profile.archetype == "short-drama audience"
        assert profile.characteristics and profile.preferences and profile.viewing_expectations
        assert profile.sources and not profile.degraded

    def test_search_failure_degrades(self):
        class DeadSearch:
            def web_search(self, query):
                raise ProviderUnavailable("offline")

        profile = build_audience_profile("x", MockChat(seed=0), DeadSearch())
        assert profile.degraded and profile.sources == []

    def test_empty_archetype_rejected(self):
        with pytest.raises(ValueError):
            build_audience_profile("  ", MockChat(seed=0), MockSearch(seed=0))


def rough_setup(tmp_path):
    blocks = fixture_blocks()
    clips = fixture_clips(tmp_path, blocks)
    timeline = assemble_rough_cut(clips, blocks, MockVoice(tmp_path / "vo", seed=0))
    profile = build_audience_profile("short-drama audience", MockChat(seed=0), MockSearch(seed=0))
    preview = render_preview(timeline, blocks, tmp_path / "previews" / "rough.json")
    return blocks, clips, timeline, profile, preview


class TestReview:
    def test_issues_cover_all_dimensions(self, tmp_path):
        _, _, timeline, profile, preview = rough_setup(tmp_path)
        report = review_rough_cut(timeline, profile, preview, MockMediaReview(seed=0), MockChat(seed=0))
        assert report.raw_critique
        dims = {i.dimension for i in report.issues}
        assert dims == {"structural", "timing", "audio_coherence"}
        known = {c.shot_id() for c in timeline.video_track} | {c.scene_id() for c in timeline.video_track}
        for issue in report.issues:
            assert issue.ids and set(issue.ids) <= known

    def test_unknown_ids_dropped_with_warning(self, tmp_path, caplog):
        _, _, timeline, profile, preview = rough_setup(tmp_path)

        class NamesUnknown(ChatProvider):
            def _complete_raw(self, messages):
                return json.dumps(
                    {
                        "issues": [
                            {
                                "dimension": "timing",
                                "description": "phantom shot drags",
                                "ids": ["scene_9_shot_9"],
                                "recommendation": "cut it",
                            },
                            {
                                "dimension": "structural",
                                "description": "real problem",
                                "ids": ["scene_0", "scene_9_shot_9"],
                                "recommendation": "tighten",
                            },
                        ]
                    }
                )

        with caplog.at_level("WARNING"):
            report = review_rough_cut(timeline, profile, preview, MockMediaReview(seed=0), NamesUnknown())
        assert len(report.issues) == 1
        assert report.issues[0].ids == ["scene_0"]
        assert any("no resolvable ids" in r.message for r in caplog.records)

    def test_empty_critique_malformed(self, tmp_path):
        _, _, timeline, profile, preview = rough_setup(tmp_path)

        class SilentReview:
            def review_media(self, media, prompt):
                return "   "

        with pytest.raises(MalformedOutput):
            review_rough_cut(timeline, profile, preview, SilentReview(), MockChat(seed=0))

    def test_preview_manifest_lists_scenes(self, tmp_path):
        blocks, _, timeline, _, preview = rough_setup(tmp_path)
        doc = json.loads(Path(preview).read_text())
        assert [s["scene_id"] for s in doc["scenes"]] == ["scene_0", "scene_1"]
        assert doc["scenes"][0]["vo_note"] == blocks[0].rough_sound_note


class TestPlanFineCut:
    def test_mock_plan_validates(self, tmp_path):
        blocks, clips, timeline, profile, preview = rough_setup(tmp_path)
        report = review_rough_cut(timeline, profile, preview, MockMediaReview(seed=0), MockChat(seed=0))
        captions = {c.shot_id: "caption" for c in clips}
        plan = plan_fine_cut(report, captions, timeline, MockChat(seed=0))
        assert plan.validate(shots_by_scene(timeline)) == []
        durational = [a for a in plan.actions if isinstance(a, (Trim, Accelerate, Retain))]
        removed = {a.shot_id for a in plan.actions if isinstance(a, Remove)}
        assert len(durational) == len(timeline.video_track) - len(removed)

    def test_zero_issue_report_yields_all_retain(self, tmp_path):
        _, clips, timeline, _, _ = rough_setup(tmp_path)
        report = ReviewReport(raw_critique="fine as is", issues=[])
        plan = plan_fine_cut(report, {}, timeline, MockChat(seed=0))
        assert all(isinstance(a, Retain) for a in plan.actions)
        assert len(plan.actions) == len(timeline.video_track)

    def test_invalid_plan_reprompted_then_malformed(self, tmp_path):
        _, _, timeline, _, _ = rough_setup(tmp_path)
        bad = json.dumps(
            {
                "actions": [
                    {"kind": "remove", "shot_id": "scene_0_shot_0"},
                    {"kind": "trim", "shot_id": "scene_0_shot_0", "start_s": 0, "duration_s": 2},
                ]
            }
        )

        class AlwaysBad(ChatProvider):
            def __init__(self):
                self.calls = 0

            def _complete_raw(self, messages):
                self.calls += 1
                return bad

        chat = AlwaysBad()
        report = ReviewReport(raw_critique="x", issues=[])
        with pytest.raises(MalformedOutput, match="after reprompt"):
            plan_fine_cut(report, {}, timeline, chat)
        assert chat.calls == 2


def simple_timeline(frame_counts: list[int], scene_split: int | None = None) -> Timeline:
    """Single- or two-scene gapless timeline from frame counts at 30 fps."""
    timeline = Timeline(name="t", global_rate=30)
    cursor = RationalTime(0, 30)
    for i, frames in enumerate(frame_counts):
        scene = "scene_0" if scene_split is None or i < scene_split else "scene_1"
        from reelsmith.model import TimelineClip

        clip = TimelineClip(
            source=f"{i}.clip.json",
            source_start=RationalTime(0, 30),
            source_duration_used=RationalTime(frames, 30),
            timeline_start=cursor,
            source_duration=RationalTime(frames, 30),
            metadata={"shot_id": f"{scene}_shot_{i}", "scene_id": scene},
        )
        timeline.video_track.append(clip)
        cursor = clip.timeline_end()
    return timeline


class TestApplyEditPlan:
    def test_all_retain_is_identity(self):
        timeline = simple_timeline([60, 90, 120])
        plan = EditPlan([Retain(c.shot_id()) for c in timeline.video_track])
        out = apply_edit_plan(timeline, plan)
        assert out == timeline
        assert apply_edit_plan(out, plan) == out  # idempotent

    def test_accelerate_halves_and_shifts_downstream(self):
        timeline = simple_timeline([180, 90])  # 6 s, 3 s
        plan = EditPlan(
            [Accelerate("scene_0_shot_0", Fraction(2)), Retain("scene_0_shot_1")]
        )
        out = apply_edit_plan(timeline, plan)
        assert out.video_track[0].effective_duration().to_seconds() == Fraction(3)
        assert out.video_track[1].timeline_start.to_seconds() == Fraction(3)
        assert out.duration().to_seconds() == Fraction(6)

    def test_remove_middle_shot_repacks(self):
        timeline = simple_timeline([60, 90, 120])
        plan = EditPlan(
            [Remove("scene_0_shot_1"), Retain("scene_0_shot_0"), Retain("scene_0_shot_2")]
        )
        out = apply_edit_plan(timeline, plan)
        assert [c.shot_id() for c in out.video_track] == ["scene_0_shot_0", "scene_0_shot_2"]
        assert validate_timeline(out) == []
        # independent duration-sum oracle
        want = Fraction(60, 30) + Fraction(120, 30)
        assert out.duration().to_seconds() == want

    def test_trim_applies_sub_range(self):
        timeline = simple_timeline([180])
        plan = EditPlan(
            [Trim("scene_0_shot_0", RationalTime(30, 30), RationalTime(60, 30))]
        )
        out = apply_edit_plan(timeline, plan)
        clip = out.video_track[0]
        assert clip.source_start == RationalTime(30, 30)
        assert clip.effective_duration().to_seconds() == Fraction(2)

    def test_trim_below_minimum_rejected(self):
        timeline = simple_timeline([180])
        plan = EditPlan([Trim("scene_0_shot_0", RationalTime(0, 30), RationalTime(10, 30))])
        with pytest.raises(ValueError, match="minimum"):
            apply_edit_plan(timeline, plan)

    def test_trim_beyond_source_rejected(self):
        timeline = simple_timeline([180])
        plan = EditPlan([Trim("scene_0_shot_0", RationalTime(150, 30), RationalTime(60, 30))])
        with pytest.raises(ValueError, match="source duration"):
            apply_edit_plan(timeline, plan)

    def test_absent_shot_rejected(self):
        timeline = simple_timeline([60])
        plan = EditPlan([Remove("scene_0_shot_9")])
        with pytest.raises(ValueError, match="absent shot"):
            apply_edit_plan(timeline, plan)

    def test_reorder_shots_within_scene(self):
        timeline = simple_timeline([60, 90, 120])
        order = ("scene_0_shot_2", "scene_0_shot_0", "scene_0_shot_1")
        plan = EditPlan([ReorderShots("scene_0", order)])
        out = apply_edit_plan(timeline, EditPlan(plan.actions).normalized(shots_by_scene(timeline)))
        assert [c.shot_id() for c in out.video_track] == list(order)
        assert validate_timeline(out) == []

    def test_reorder_scenes(self):
        timeline = simple_timeline([60, 90, 120], scene_split=2)
        plan = EditPlan([ReorderScenes(("scene_1", "scene_0"))]).normalized(shots_by_scene(timeline))
        out = apply_edit_plan(timeline, plan)
        assert [c.scene_id() for c in out.video_track] == ["scene_1", "scene_0", "scene_0"]
        assert out.video_track[0].timeline_start.to_seconds() == 0

    def test_removed_shot_with_durational_action_rejected(self):
        timeline = simple_timeline([60, 90])
        plan = EditPlan([Remove("scene_0_shot_0"), Retain("scene_0_shot_0"), Retain("scene_0_shot_1")])
        with pytest.raises(ValueError, match="also has a durational"):
            apply_edit_plan(timeline, plan)

    def test_invalid_scene_permutation_rejected(self):
        timeline = simple_timeline([60, 90], scene_split=1)
        plan = EditPlan([ReorderScenes(("scene_0", "scene_0"))]).normalized(shots_by_scene(timeline))
        with pytest.raises(ValueError, match="bijection"):
            apply_edit_plan(timeline, plan)

    def test_audio_tracks_pass_through(self, tmp_path):
        blocks = fixture_blocks()
        clips = fixture_clips(tmp_path, blocks)
        timeline = assemble_rough_cut(clips, blocks, MockVoice(tmp_path / "vo", seed=0))
        plan = EditPlan([Retain(c.shot_id()) for c in timeline.video_track])
        out = apply_edit_plan(timeline, plan)
        assert out.audio_tracks[AudioKind.VOICE_OVER] == timeline.audio_tracks[AudioKind.VOICE_OVER]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_random_plans_preserve_invariants(seed):
    rng = random.Random(seed)
    timeline = random_timeline(rng)
    plan = random_plan(rng, timeline)
    out = apply_edit_plan(timeline, plan)
    assert validate_timeline(out) == []
    removed = {a.shot_id for a in plan.actions if isinstance(a, Remove)}
    kept = [c for c in out.video_track]
    # duration oracle: sum of kept source durations / speeds, exact
    expected = Fraction(0)
    for clip in kept:
        expected += clip.source_duration_used.to_seconds() / clip.speed_factor
    assert out.duration().to_seconds() == expected
    assert {c.shot_id() for c in timeline.video_track} - removed == {c.shot_id() for c in kept}
