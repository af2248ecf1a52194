"""Audience-driven rhythm control: rough cut, simulated review, and fine-cut editing.

apply_edit_plan is a pure function in exact rational arithmetic; everything
that talks to providers degrades or reprompts per the documented policy.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

from .model import (
    AudioKind,
    GeneratedClip,
    RationalTime,
    SceneBlock,
    Timeline,
    TimelineClip,
    repack_video_track,
    validate_timeline,
)
from .prompts import build_messages, load_template
from .providers.base import MalformedOutput, ProviderUnavailable

log = logging.getLogger(__name__)

ISSUE_DIMENSIONS = ("structural", "timing", "audio_coherence")

# Shots trimmed or accelerated may never drop below this length.
MIN_SHOT_SECONDS = Fraction(1, 2)

PROFILE_SCHEMA = {
    "type": "object",
    "properties": {
        "characteristics": {"type": "array", "items": {"type": "string"}},
        "preferences": {"type": "array", "items": {"type": "string"}},
        "viewing_expectations": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["characteristics", "preferences", "viewing_expectations"],
}
ANALYZE_SCHEMA = {
    "type": "object",
    "properties": {
        "issues": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "dimension": {"type": "string", "enum": list(ISSUE_DIMENSIONS)},
                    "description": {"type": "string", "minLength": 1},
                    "ids": {"type": "array", "items": {"type": "string"}},
                    "recommendation": {"type": "string"},
                },
                "required": ["dimension", "description", "ids"],
            },
        }
    },
    "required": ["issues"],
}
PLAN_SCHEMA = {
    "type": "object",
    "properties": {
        "actions": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"kind": {"type": "string"}},
                "required": ["kind"],
            },
        }
    },
    "required": ["actions"],
}


@dataclass
class AudienceProfile:
    archetype: str
    characteristics: list[str] = field(default_factory=list)
    preferences: list[str] = field(default_factory=list)
    viewing_expectations: list[str] = field(default_factory=list)
    sources: list[tuple[str, str]] = field(default_factory=list)
    degraded: bool = False


@dataclass
class ReviewIssue:
    dimension: str
    description: str
    ids: list[str]
    recommendation: str = ""


@dataclass
class ReviewReport:
    raw_critique: str
    issues: list[ReviewIssue] = field(default_factory=list)


# -- edit plan grammar -----------------------------------------------------


@dataclass(frozen=True)
class ReorderScenes:
    order: tuple[str, ...]


@dataclass(frozen=True)
class ReorderShots:
    scene_id: str
    order: tuple[str, ...]


@dataclass(frozen=True)
class Remove:
    shot_id: str


@dataclass(frozen=True)
class Trim:
    shot_id: str
    source_start: RationalTime
    source_duration: RationalTime


@dataclass(frozen=True)
class Accelerate:
    shot_id: str
    speed: Fraction


@dataclass(frozen=True)
class Retain:
    shot_id: str


EditAction = Union[ReorderScenes, ReorderShots, Remove, Trim, Accelerate, Retain]
DURATIONAL = (Trim, Accelerate, Retain)


@dataclass
class EditPlan:
    actions: list[EditAction] = field(default_factory=list)

    def validate(self, shots_by_scene: dict[str, list[str]]) -> list[str]:
        """Check the plan's internal invariants against a shot inventory."""
        problems: list[str] = []
        all_shots = {s for shots in shots_by_scene.values() for s in shots}
        removed = {a.shot_id for a in self.actions if isinstance(a, Remove)}
        durational_seen: dict[str, int] = {}
        for action in self.actions:
            if isinstance(action, DURATIONAL):
                durational_seen[action.shot_id] = durational_seen.get(action.shot_id, 0) + 1
                if action.shot_id in removed:
                    problems.append(f"removed shot {action.shot_id} also has a durational action")
            if isinstance(action, (Remove, Trim, Accelerate, Retain)) and action.shot_id not in all_shots:
                problems.append(f"action references absent shot {action.shot_id}")
            if isinstance(action, Accelerate) and action.speed <= 1:
                problems.append(f"accelerate({action.shot_id}) speed must be > 1")
            if isinstance(action, ReorderScenes) and sorted(action.order) != sorted(shots_by_scene):
                problems.append(f"scene permutation {list(action.order)} is not a bijection")
            if isinstance(action, ReorderShots):
                want = shots_by_scene.get(action.scene_id)
                if want is None:
                    problems.append(f"reorder references absent scene {action.scene_id}")
                elif sorted(action.order) != sorted(want):
                    problems.append(f"shot permutation for {action.scene_id} is not a bijection")
        for shot_id, count in durational_seen.items():
            if count > 1:
                problems.append(f"shot {shot_id} has {count} durational actions")
        return problems

    def normalized(self, shots_by_scene: dict[str, list[str]]) -> "EditPlan":
        """Fill in an explicit Retain for every surviving shot without a durational action."""
        removed = {a.shot_id for a in self.actions if isinstance(a, Remove)}
        covered = {a.shot_id for a in self.actions if isinstance(a, DURATIONAL)}
        extra: list[EditAction] = []
        for shots in shots_by_scene.values():
            for shot_id in shots:
                if shot_id not in removed and shot_id not in covered:
                    extra.append(Retain(shot_id))
        return EditPlan(actions=list(self.actions) + extra)


# -- rough cut ----------------------------------------------------------------


def assemble_rough_cut(
    clips: list[GeneratedClip],
    blocks: list[SceneBlock],
    voice: Any,
    global_rate: int = 30,
    voice_id: str = "narrator",
    name: str = "rough_cut",
) -> Timeline:
    """First assembly: clips in scene/shot order, gapless, with placeholder narration.

    Each block's rough sound note is synthesized as a temporary voice-over cue
    starting at its scene's start (truncated at scene end so tracks stay
    non-overlapping); all other audio tracks stay empty.
    """
    by_shot = {c.shot_id: c for c in clips}
    timeline = Timeline(name=name, global_rate=global_rate)
    cursor = RationalTime(0, global_rate)
    scene_starts: dict[str, RationalTime] = {}
    scene_ends: dict[str, RationalTime] = {}
    for block in sorted(blocks, key=lambda b: b.index):
        scene_starts[block.id] = cursor
        for shot in block.shot_prompts:
            clip = by_shot.get(shot.id)
            if clip is None:
                raise ValueError(f"no generated clip for shot {shot.id}")
            item = TimelineClip(
                source=clip.media_path,
                source_start=RationalTime(0, clip.frame_rate),
                source_duration_used=clip.duration(),
                timeline_start=cursor,
                source_duration=clip.duration(),
                metadata={"shot_id": shot.id, "scene_id": block.id},
            )
            timeline.video_track.append(item)
            cursor = item.timeline_end()
        scene_ends[block.id] = cursor
    for block in sorted(blocks, key=lambda b: b.index):
        if not block.rough_sound_note.strip():
            continue
        path, duration = voice.synthesize_voice(block.rough_sound_note, voice_id)
        start = scene_starts[block.id]
        avail = scene_ends[block.id].to_seconds() - start.to_seconds()
        used = min(Fraction(duration), avail)
        if used <= 0:
            continue
        timeline.audio_tracks[AudioKind.VOICE_OVER].append(
            TimelineClip(
                source=path,
                source_start=RationalTime(0, 48000),
                source_duration_used=RationalTime.from_seconds(used),
                timeline_start=start,
                gain_db=0.0,
                source_duration=RationalTime.from_seconds(Fraction(duration)),
                metadata={"cue_id": f"vo_placeholder_{block.id}", "scene_id": block.id},
            )
        )
    return timeline


# -- audience review ------------------------------------------------------------


def build_audience_profile(archetype: str, chat: Any, search: Any) -> AudienceProfile:
    """Profile the archetype from web search results; degrade gracefully offline."""
    if not archetype or not archetype.strip():
        raise ValueError("archetype must be non-empty")
    degraded = False
    results: list[tuple[str, str]] = []
    try:
        results = search.web_search(f"{archetype} viewing preferences and habits")
    except ProviderUnavailable as err:
        log.warning("audience search failed, degrading to archetype-only profile: %s", err)
        degraded = True
    payload = {"archetype": archetype, "results": [[t, s] for t, s in results]}
    value = chat.chat_complete(
        build_messages(load_template("rhythm/audience_profile.txt"), payload), schema=PROFILE_SCHEMA
    )
    return AudienceProfile(
        archetype=archetype,
        characteristics=value["characteristics"],
        preferences=value["preferences"],
        viewing_expectations=value["viewing_expectations"],
        sources=results,
        degraded=degraded,
    )


def render_preview(timeline: Timeline, blocks: list[SceneBlock], path: Path) -> Path:
    """Write the concatenation manifest that stands in for a rendered preview."""
    notes = {b.id: b.rough_sound_note for b in blocks}
    scenes: dict[str, dict] = {}
    for clip in timeline.video_track:
        scene_id = clip.scene_id() or "scene_unknown"
        scene = scenes.setdefault(scene_id, {"scene_id": scene_id, "shots": [], "vo_note": notes.get(scene_id, "")})
        scene["shots"].append(
            {
                "shot_id": clip.shot_id(),
                "start_s": float(clip.timeline_start.to_seconds()),
                "end_s": float(clip.timeline_end().to_seconds()),
            }
        )
    doc = {"kind": "preview-manifest", "timeline": timeline.name, "scenes": list(scenes.values())}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, ensure_ascii=False), encoding="utf-8")
    return path


def review_rough_cut(
    timeline: Timeline,
    profile: AudienceProfile,
    preview_path: Path,
    media_review: Any,
    chat: Any,
) -> ReviewReport:
    """Simulated-audience critique of the preview, then dimension-tagged analysis."""
    critique_prompt = load_template("rhythm/critique.txt") + "\n\naudience profile:\n" + json.dumps(
        {
            "archetype": profile.archetype,
            "characteristics": profile.characteristics,
            "preferences": profile.preferences,
            "viewing_expectations": profile.viewing_expectations,
        },
        sort_keys=True,
    )
    critique = media_review.review_media(str(preview_path), critique_prompt)
    if not critique or not critique.strip():
        raise MalformedOutput("empty critique from media review")
    shot_ids = [c.shot_id() for c in timeline.video_track if c.shot_id()]
    scene_ids = sorted({c.scene_id() for c in timeline.video_track if c.scene_id()})
    payload = {"critique": critique, "shot_ids": shot_ids, "scene_ids": scene_ids}
    value = chat.chat_complete(
        build_messages(load_template("rhythm/analyze.txt"), payload), schema=ANALYZE_SCHEMA
    )
    known = set(shot_ids) | set(scene_ids)
    issues: list[ReviewIssue] = []
    for raw in value["issues"]:
        ids = [i for i in raw["ids"] if i in known]
        dropped = [i for i in raw["ids"] if i not in known]
        if dropped:
            log.warning("review issue names unknown ids %s; dropped", dropped)
        if not ids:
            log.warning("review issue %r has no resolvable ids; dropped", raw["description"])
            continue
        issues.append(
            ReviewIssue(
                dimension=raw["dimension"],
                description=raw["description"],
                ids=ids,
                recommendation=raw.get("recommendation", ""),
            )
        )
    return ReviewReport(raw_critique=critique, issues=issues)


# -- fine cut -------------------------------------------------------------------


def _parse_actions(raw_actions: list[dict]) -> list[EditAction]:
    actions: list[EditAction] = []
    for raw in raw_actions:
        kind = raw.get("kind")
        if kind == "remove":
            actions.append(Remove(raw["shot_id"]))
        elif kind == "retain":
            actions.append(Retain(raw["shot_id"]))
        elif kind == "accelerate":
            actions.append(Accelerate(raw["shot_id"], _parse_fraction(raw["speed"])))
        elif kind == "trim":
            actions.append(
                Trim(
                    raw["shot_id"],
                    RationalTime.from_seconds(_parse_fraction(raw["start_s"])),
                    RationalTime.from_seconds(_parse_fraction(raw["duration_s"])),
                )
            )
        elif kind == "reorder_shots":
            actions.append(ReorderShots(raw["scene_id"], tuple(raw["order"])))
        elif kind == "reorder_scenes":
            actions.append(ReorderScenes(tuple(raw["order"])))
        else:
            raise MalformedOutput(f"unknown edit action kind {kind!r}")
    return actions


def _parse_fraction(value: Any) -> Fraction:
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(value).limit_denominator(1_000_000)


def shots_by_scene(timeline: Timeline) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for clip in timeline.video_track:
        scene, shot = clip.scene_id(), clip.shot_id()
        if scene is None or shot is None:
            continue
        out.setdefault(scene, []).append(shot)
    return out


def plan_fine_cut(
    report: ReviewReport,
    captions: dict[str, str],
    timeline: Timeline,
    chat: Any,
    min_shot_seconds: Fraction = MIN_SHOT_SECONDS,
) -> EditPlan:
    """Turn the review into a validated edit plan; one reprompt on invariant breakage."""
    inventory = shots_by_scene(timeline)
    shots_payload = [
        {
            "id": clip.shot_id(),
            "scene_id": clip.scene_id(),
            "duration_s": float(clip.effective_duration().to_seconds()),
            "caption": captions.get(clip.shot_id() or "", ""),
        }
        for clip in timeline.video_track
    ]
    payload = {
        "issues": [
            {
                "dimension": i.dimension,
                "description": i.description,
                "ids": i.ids,
                "recommendation": i.recommendation,
            }
            for i in report.issues
        ],
        "shots": shots_payload,
        "min_shot_seconds": float(min_shot_seconds),
    }
    messages = build_messages(load_template("rhythm/fine_cut.txt"), payload)
    value = chat.chat_complete(messages, schema=PLAN_SCHEMA)
    plan = EditPlan(_parse_actions(value["actions"]))
    problems = plan.validate(inventory)
    if problems:
        retry = messages + [
            {"role": "assistant", "content": json.dumps(value, sort_keys=True)},
            {"role": "user", "content": f"The plan violates its invariants: {problems}. Produce a corrected plan."},
        ]
        value = chat.chat_complete(retry, schema=PLAN_SCHEMA)
        plan = EditPlan(_parse_actions(value["actions"]))
        problems = plan.validate(inventory)
        if problems:
            raise MalformedOutput(f"edit plan invalid after reprompt: {problems}")
    return plan.normalized(inventory)


def apply_edit_plan(
    timeline: Timeline, plan: EditPlan, min_shot_seconds: Fraction = MIN_SHOT_SECONDS
) -> Timeline:
    """Apply reorder → remove → durational actions and re-pack the video track.

    Pure function: the input timeline is never mutated. Audio tracks pass
    through unchanged (the sound stage rebuilds them against the new picture),
    which also makes an all-retain plan an exact identity.
    """
    inventory = shots_by_scene(timeline)
    problems = plan.validate(inventory)
    if problems:
        raise ValueError(f"edit plan invalid: {problems}")

    scene_order = sorted({c.scene_id() for c in timeline.video_track if c.scene_id()}, key=_scene_sort_key(timeline))
    clips_by_scene: dict[str, list[TimelineClip]] = {s: [] for s in scene_order}
    for clip in timeline.video_track:
        clips_by_scene[clip.scene_id() or ""].append(clip)

    for action in plan.actions:
        if isinstance(action, ReorderScenes):
            scene_order = list(action.order)
        elif isinstance(action, ReorderShots):
            current = clips_by_scene[action.scene_id]
            by_id = {c.shot_id(): c for c in current}
            clips_by_scene[action.scene_id] = [by_id[s] for s in action.order]

    removed = {a.shot_id for a in plan.actions if isinstance(a, Remove)}
    durational: dict[str, EditAction] = {
        a.shot_id: a for a in plan.actions if isinstance(a, DURATIONAL)
    }

    new_clips: list[TimelineClip] = []
    for scene_id in scene_order:
        for clip in clips_by_scene[scene_id]:
            shot_id = clip.shot_id() or ""
            if shot_id in removed:
                continue
            action = durational.get(shot_id)
            edited = replace(clip, metadata=dict(clip.metadata))
            if isinstance(action, Trim):
                if action.source_duration.to_seconds() < min_shot_seconds:
                    raise ValueError(
                        f"trim of {shot_id} falls below the {float(min_shot_seconds)} s minimum"
                    )
                if clip.source_duration is not None and (
                    action.source_start + action.source_duration > clip.source_duration
                ):
                    raise ValueError(f"trim of {shot_id} exceeds its source duration")
                edited = replace(
                    edited, source_start=action.source_start, source_duration_used=action.source_duration
                )
            elif isinstance(action, Accelerate):
                edited = replace(edited, speed_factor=clip.speed_factor * action.speed)
                if edited.effective_duration().to_seconds() < min_shot_seconds:
                    raise ValueError(
                        f"acceleration of {shot_id} falls below the {float(min_shot_seconds)} s minimum"
                    )
            new_clips.append(edited)

    out = Timeline(
        name=timeline.name,
        global_rate=timeline.global_rate,
        video_track=repack_video_track(new_clips, timeline.global_rate),
        audio_tracks={k: [replace(c, metadata=dict(c.metadata)) for c in v] for k, v in timeline.audio_tracks.items()},
    )
    violations = validate_timeline(out)
    if violations:
        raise ValueError(f"edited timeline violates invariants: {violations}")
    return out


def _scene_sort_key(timeline: Timeline):
    first_start = {}
    for clip in timeline.video_track:
        scene = clip.scene_id()
        if scene is not None and scene not in first_start:
            first_start[scene] = clip.timeline_start.to_seconds()
    return lambda scene: first_start.get(scene, Fraction(0))
