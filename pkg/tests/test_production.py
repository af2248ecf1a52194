"""Per-shot generation ordering, reference binding, failure surfacing, captions."""

from __future__ import annotations

from pathlib import Path

import pytest

from reelsmith.model import GeneratedClip, ProjectInput, Reference, SceneBlock, ShotSpec, ShotType
from reelsmith.production import (
    DEFAULT_DURATION_HINT,
    SceneGenerationError,
    caption_clip,
    generate_scene,
    parse_caption,
    shot_prompt_text,
)
from reelsmith.providers.mock import MockMediaReview, MockVideo


def planned_shot(i: int, prompt: str, bindings: list[str]) -> ShotSpec:
    return ShotSpec(
        id=f"scene_0_shot_{i}",
        scene_id="scene_0",
        content_prompt=prompt,
        shot_type=ShotType.WIDE,
        camera_movement="slow dolly-in",
        camera_angle="eye level",
        atmosphere="overcast stillness",
        reference_bindings=bindings,
    )


@pytest.fixture()
def project_input(tmp_path) -> ProjectInput:
    for name in ("mara.png", "lighthouse.png"):
        (tmp_path / name).write_bytes(b"\x89PNG fake " + name.encode())
    return ProjectInput(
        theme_text="t",
        character_refs=[Reference("Mara", str(tmp_path / "mara.png"))],
        location_refs=[Reference("the lighthouse", str(tmp_path / "lighthouse.png"))],
    )


def make_block(prompts: list[str], bindings: list[str]) -> SceneBlock:
    return SceneBlock(
        id="scene_0",
        index=0,
        shot_prompts=[planned_shot(i, p, bindings) for i, p in enumerate(prompts)],
    )


class TestGenerateScene:
    def test_three_shots_ordered_and_deterministic(self, tmp_path, project_input):
        block = make_block(["first", "second", "third"], ["Mara", "the lighthouse"])
        video = MockVideo(tmp_path / "media", seed=0)
        clips = generate_scene(block, project_input, video, assets_dir=tmp_path / "assets")
        assert [c.shot_id for c in clips] == ["scene_0_shot_0", "scene_0_shot_1", "scene_0_shot_2"]
        again = generate_scene(block, project_input, MockVideo(tmp_path / "media2", seed=0), assets_dir=tmp_path / "assets2")
        for a, b in zip(clips, again):
            assert Path(a.media_path).read_bytes() == Path(b.media_path).read_bytes()

    def test_clips_stored_per_shot(self, tmp_path, project_input):
        block = make_block(["one"], ["Mara"])
        clips = generate_scene(block, project_input, MockVideo(tmp_path / "m", seed=0), assets_dir=tmp_path / "assets")
        assert clips[0].media_path.endswith("scene_0_shot_0.clip.json")
        assert Path(clips[0].media_path).exists()

    def test_unknown_binding_rejected(self, tmp_path, project_input):
        block = make_block(["one"], ["Nobody"])
        with pytest.raises(ValueError, match="Nobody"):
            generate_scene(block, project_input, MockVideo(tmp_path, seed=0))

    def test_unplanned_block_rejected(self, tmp_path, project_input):
        block = make_block(["one"], ["Mara"])
        block.shot_prompts[0].shot_type = ShotType.UNSPECIFIED
        with pytest.raises(ValueError, match="unplanned"):
            generate_scene(block, project_input, MockVideo(tmp_path, seed=0))

    def test_partial_failure_lists_shot_id(self, tmp_path, project_input):
        block = make_block(["fine", "[reject] bad", "also fine"], ["Mara"])
        with pytest.raises(SceneGenerationError) as exc_info:
            generate_scene(block, project_input, MockVideo(tmp_path, seed=0), assets_dir=tmp_path / "a")
        err = exc_info.value
        assert [sid for sid, _ in err.failed] == ["scene_0_shot_1"]
        assert sorted(c.shot_id for c in err.clips) == ["scene_0_shot_0", "scene_0_shot_2"]

    def test_prompt_carries_camera_vocabulary(self):
        text = shot_prompt_text(planned_shot(0, "the door opens", []))
        for fragment in ("the door opens", "wide", "slow dolly-in", "eye level", "overcast stillness"):
            assert fragment in text

    def test_default_duration_hint(self):
        assert DEFAULT_DURATION_HINT == pytest.approx(5.1)


class TestCaptions:
    def generated(self, tmp_path) -> GeneratedClip:
        clip = MockVideo(tmp_path, seed=0).generate_video("a quiet arrival", [], 5.1)
        return GeneratedClip(
            shot_id="scene_0_shot_0",
            media_path=clip.media_path,
            frame_count=clip.frame_count,
            frame_rate=clip.frame_rate,
        )

    def test_caption_covers_duration(self, tmp_path):
        clip = self.generated(tmp_path)
        captioned = caption_clip(clip, MockMediaReview(seed=0))
        segments = parse_caption(captioned.text_description)
        assert segments[0][0] == 0.0
        assert segments[-1][1] == pytest.approx(5.1, abs=0.1)
        for (_, end_a, _), (start_b, _, _) in zip(segments, segments[1:]):
            assert end_a == pytest.approx(start_b, abs=0.1)

    def test_caption_replay_deterministic(self, tmp_path):
        clip = self.generated(tmp_path)
        a = caption_clip(clip, MockMediaReview(seed=0)).text_description
        b = caption_clip(clip, MockMediaReview(seed=0)).text_description
        assert a == b

    def test_missing_media_rejected(self, tmp_path):
        clip = GeneratedClip(shot_id="s", media_path=str(tmp_path / "gone.json"))
        with pytest.raises(FileNotFoundError):
            caption_clip(clip, MockMediaReview(seed=0))

    def test_bad_caption_shape_rejected(self, tmp_path):
        clip = self.generated(tmp_path)

        class BadReview:
            def review_media(self, media, prompt):
                return "no timecodes here"

        with pytest.raises(ValueError, match="caption line"):
            caption_clip(clip, BadReview())

    def test_short_coverage_rejected(self, tmp_path):
        clip = self.generated(tmp_path)

        class ShortReview:
            def review_media(self, media, prompt):
                return "[0.0–2.0] begins\n[2.0–3.0] ends early"

        with pytest.raises(ValueError, match="ends at"):
            caption_clip(clip, ShortReview())

    def test_hyphen_separator_accepted(self):
        segments = parse_caption("[0.0-2.5] a\n[2.5-5.1] b")
        assert len(segments) == 2
