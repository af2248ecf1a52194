"""Per-shot video generation from re-planned shots, plus timecoded captioning."""

from __future__ import annotations

import re
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional

from .model import GeneratedClip, ProjectInput, SceneBlock
from .prompts import load_template
from .providers.base import ProviderError

# 153 frames at the 30 fps default.
DEFAULT_DURATION_HINT = 153 / 30

CAPTION_LINE = re.compile(r"^\[(\d+(?:\.\d+)?)[–-](\d+(?:\.\d+)?)\]\s*(.+)$")


class SceneGenerationError(ProviderError):
    """One or more shots failed; successful clips are preserved on the error."""

    def __init__(self, failed: list[tuple[str, str]], clips: list[GeneratedClip]):
        self.failed = failed
        self.clips = clips
        names = ", ".join(shot_id for shot_id, _ in failed)
        super().__init__(f"generation failed for shots: {names}")


def shot_prompt_text(shot) -> str:
    """The full generation prompt: content plus the planned camera vocabulary."""
    parts = [shot.content_prompt]
    if shot.shot_type.value != "unspecified":
        parts.append(f"Shot type: {shot.shot_type.value}.")
    if shot.camera_movement:
        parts.append(f"Camera movement: {shot.camera_movement}.")
    if shot.camera_angle:
        parts.append(f"Camera angle: {shot.camera_angle}.")
    if shot.atmosphere:
        parts.append(f"Atmosphere: {shot.atmosphere}.")
    return " ".join(parts)


def _reference_images(block: SceneBlock, project_input: ProjectInput) -> list[str]:
    """Union of the block's character/location reference images, order-stable."""
    paths: list[str] = []
    for shot in block.shot_prompts:
        for name in shot.reference_bindings:
            ref = project_input.reference_by_name(name)
            if ref is None:
                raise ValueError(f"shot {shot.id}: unknown reference binding {name!r}")
            if ref.image_path not in paths:
                paths.append(ref.image_path)
    return paths


def generate_scene(
    block: SceneBlock,
    project_input: ProjectInput,
    video: Any,
    assets_dir: Optional[Path] = None,
    max_workers: int = 4,
    duration_hint: float = DEFAULT_DURATION_HINT,
) -> list[GeneratedClip]:
    """Generate one clip per shot, concurrently, all sharing the block's reference images.

    Results keep shot order. Failures surface after every shot has been
    attempted, as a SceneGenerationError carrying the partial result.
    """
    if not block.is_replanned():
        raise ValueError(f"block {block.id} has unplanned shots; run camera planning first")
    images = _reference_images(block, project_input)

    def run_one(shot) -> GeneratedClip:
        clip = video.generate_video(shot_prompt_text(shot), images, duration_hint)
        return replace(clip, shot_id=shot.id)

    results: list[Optional[GeneratedClip]] = [None] * len(block.shot_prompts)
    failures: list[tuple[str, str]] = []
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {pool.submit(run_one, shot): i for i, shot in enumerate(block.shot_prompts)}
        for future, i in futures.items():
            try:
                results[i] = future.result()
            except ProviderError as err:
                failures.append((block.shot_prompts[i].id, str(err)))
    clips: list[GeneratedClip] = []
    for result in results:
        if result is None:
            continue
        clips.append(_store_clip(result, assets_dir) if assets_dir is not None else result)
    if failures:
        failures.sort(key=lambda pair: pair[0])
        raise SceneGenerationError(failures, clips)
    return clips


def _store_clip(clip: GeneratedClip, assets_dir: Path) -> GeneratedClip:
    """Move provider output to its stable per-shot location."""
    src = Path(clip.media_path)
    dest = Path(assets_dir) / "video" / f"{clip.shot_id}{''.join(src.suffixes)}"
    dest.parent.mkdir(parents=True, exist_ok=True)
    if src.resolve() != dest.resolve():
        shutil.copyfile(src, dest)
    return replace(clip, media_path=str(dest))


def parse_caption(text: str) -> list[tuple[float, float, str]]:
    segments = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        m = CAPTION_LINE.match(line)
        if not m:
            raise ValueError(f"caption line not in [start–end] form: {line!r}")
        segments.append((float(m.group(1)), float(m.group(2)), m.group(3)))
    return segments


def caption_clip(clip: GeneratedClip, media_review: Any, tolerance: float = 0.1) -> GeneratedClip:
    """Attach a timecoded description covering the clip's full duration."""
    duration = clip.frame_count / clip.frame_rate
    text = media_review.review_media(clip.media_path, load_template("production/caption.txt"))
    segments = parse_caption(text)
    if not segments:
        raise ValueError(f"empty caption for clip {clip.shot_id}")
    if abs(segments[0][0]) > tolerance:
        raise ValueError(f"caption for {clip.shot_id} does not start at 0")
    for (_, end_a, _), (start_b, _, _) in zip(segments, segments[1:]):
        if abs(end_a - start_b) > tolerance:
            raise ValueError(f"caption for {clip.shot_id} has a gap at {end_a}")
    if abs(segments[-1][1] - duration) > tolerance:
        raise ValueError(
            f"caption for {clip.shot_id} ends at {segments[-1][1]}, clip lasts {duration:.2f}"
        )
    return replace(clip, text_description=text)
