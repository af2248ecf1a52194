"""Project-directory persistence: one JSON document per stage, append-only versions.

Layout under a project directory:
    project.json          index: input, stage log, latest stage-file versions
    config.json           run configuration
    stages/<stage>.<n>.json
    assets/               generated media
    transcripts/          provider transcripts (JSON-lines)
    index/                vector indexes
    exports/              .otio documents
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path
from typing import Any

from .scoring.scorecard import ScoreCard
from .model import (
    AudioKind,
    GeneratedClip,
    ProjectInput,
    ProjectState,
    RationalTime,
    Reference,
    SceneBlock,
    ShotSpec,
    ShotType,
    StageLogEntry,
    Timeline,
    TimelineClip,
)
from .rhythm import (
    Accelerate,
    AudienceProfile,
    EditAction,
    EditPlan,
    Remove,
    ReorderScenes,
    ReorderShots,
    Retain,
    ReviewIssue,
    ReviewReport,
    Trim,
)
from .sound.cues import AudioCue
from .structuring import StoryboardDoc, StoryboardEntry

PROJECT_FILE = "project.json"
CONFIG_FILE = "config.json"


def _frac_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _frac(value: str | int | float) -> Fraction:
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(value)


def _rt_dict(value: RationalTime) -> dict:
    return {"value": value.value, "rate": value.rate}


def _rt(value: dict) -> RationalTime:
    return RationalTime(int(value["value"]), int(value["rate"]))


# -- per-type serializers --------------------------------------------------------


def input_to_dict(inp: ProjectInput) -> dict:
    return {
        "theme_text": inp.theme_text,
        "character_refs": [{"name": r.name, "image_path": r.image_path} for r in inp.character_refs],
        "location_refs": [{"name": r.name, "image_path": r.image_path} for r in inp.location_refs],
        "target_audience": inp.target_audience,
    }


def input_from_dict(data: dict) -> ProjectInput:
    return ProjectInput(
        theme_text=data["theme_text"],
        character_refs=[Reference(r["name"], r["image_path"]) for r in data["character_refs"]],
        location_refs=[Reference(r["name"], r["image_path"]) for r in data["location_refs"]],
        target_audience=data.get("target_audience"),
    )


def storyboard_to_dict(doc: StoryboardDoc) -> dict:
    body: Any = doc.body
    if isinstance(doc.body, list):
        body = [{"text": e.text, "tag": e.tag} for e in doc.body]
    return {"phase": doc.phase, "body": body}


def storyboard_from_dict(data: dict) -> StoryboardDoc:
    body = data["body"]
    if isinstance(body, list):
        body = [StoryboardEntry(text=e["text"], tag=e["tag"]) for e in body]
    return StoryboardDoc(phase=data["phase"], body=body)


def shot_to_dict(shot: ShotSpec) -> dict:
    return {
        "id": shot.id,
        "scene_id": shot.scene_id,
        "content_prompt": shot.content_prompt,
        "shot_type": shot.shot_type.value,
        "camera_movement": shot.camera_movement,
        "camera_angle": shot.camera_angle,
        "atmosphere": shot.atmosphere,
        "reference_bindings": list(shot.reference_bindings),
    }


def shot_from_dict(data: dict) -> ShotSpec:
    return ShotSpec(
        id=data["id"],
        scene_id=data["scene_id"],
        content_prompt=data["content_prompt"],
        shot_type=ShotType(data["shot_type"]),
        camera_movement=data["camera_movement"],
        camera_angle=data["camera_angle"],
        atmosphere=data["atmosphere"],
        reference_bindings=list(data["reference_bindings"]),
    )


def block_to_dict(block: SceneBlock) -> dict:
    return {
        "id": block.id,
        "index": block.index,
        "shot_prompts": [shot_to_dict(s) for s in block.shot_prompts],
        "time_of_day": block.time_of_day,
        "location": block.location,
        "characters": list(block.characters),
        "visual_elements": list(block.visual_elements),
        "narrative_objective": block.narrative_objective,
        "rough_sound_note": block.rough_sound_note,
    }


def block_from_dict(data: dict) -> SceneBlock:
    return SceneBlock(
        id=data["id"],
        index=data["index"],
        shot_prompts=[shot_from_dict(s) for s in data["shot_prompts"]],
        time_of_day=data["time_of_day"],
        location=data["location"],
        characters=list(data["characters"]),
        visual_elements=list(data["visual_elements"]),
        narrative_objective=data["narrative_objective"],
        rough_sound_note=data["rough_sound_note"],
    )


def clip_to_dict(clip: GeneratedClip) -> dict:
    return asdict(clip)


def clip_from_dict(data: dict) -> GeneratedClip:
    return GeneratedClip(**data)


def timeline_clip_to_dict(clip: TimelineClip) -> dict:
    return {
        "source": clip.source,
        "source_start": _rt_dict(clip.source_start),
        "source_duration_used": _rt_dict(clip.source_duration_used),
        "timeline_start": _rt_dict(clip.timeline_start),
        "speed_factor": _frac_str(clip.speed_factor),
        "gain_db": clip.gain_db,
        "source_duration": _rt_dict(clip.source_duration) if clip.source_duration else None,
        "metadata": clip.metadata,
    }


def timeline_clip_from_dict(data: dict) -> TimelineClip:
    return TimelineClip(
        source=data["source"],
        source_start=_rt(data["source_start"]),
        source_duration_used=_rt(data["source_duration_used"]),
        timeline_start=_rt(data["timeline_start"]),
        speed_factor=_frac(data["speed_factor"]),
        gain_db=data.get("gain_db"),
        source_duration=_rt(data["source_duration"]) if data.get("source_duration") else None,
        metadata=dict(data.get("metadata", {})),
    )


def timeline_to_dict(timeline: Timeline) -> dict:
    return {
        "name": timeline.name,
        "global_rate": timeline.global_rate,
        "video_track": [timeline_clip_to_dict(c) for c in timeline.video_track],
        "audio_tracks": {
            kind.value: [timeline_clip_to_dict(c) for c in timeline.audio_tracks.get(kind, [])]
            for kind in AudioKind
        },
    }


def timeline_from_dict(data: dict) -> Timeline:
    return Timeline(
        name=data["name"],
        global_rate=data["global_rate"],
        video_track=[timeline_clip_from_dict(c) for c in data["video_track"]],
        audio_tracks={
            AudioKind(k): [timeline_clip_from_dict(c) for c in clips]
            for k, clips in data["audio_tracks"].items()
        },
    )


def profile_to_dict(profile: AudienceProfile) -> dict:
    return {
        "archetype": profile.archetype,
        "characteristics": profile.characteristics,
        "preferences": profile.preferences,
        "viewing_expectations": profile.viewing_expectations,
        "sources": [[t, s] for t, s in profile.sources],
        "degraded": profile.degraded,
    }


def profile_from_dict(data: dict) -> AudienceProfile:
    return AudienceProfile(
        archetype=data["archetype"],
        characteristics=list(data["characteristics"]),
        preferences=list(data["preferences"]),
        viewing_expectations=list(data["viewing_expectations"]),
        sources=[(t, s) for t, s in data["sources"]],
        degraded=data.get("degraded", False),
    )


def report_to_dict(report: ReviewReport) -> dict:
    return {
        "raw_critique": report.raw_critique,
        "issues": [
            {
                "dimension": i.dimension,
                "description": i.description,
                "ids": list(i.ids),
                "recommendation": i.recommendation,
            }
            for i in report.issues
        ],
    }


def report_from_dict(data: dict) -> ReviewReport:
    return ReviewReport(
        raw_critique=data["raw_critique"],
        issues=[
            ReviewIssue(
                dimension=i["dimension"],
                description=i["description"],
                ids=list(i["ids"]),
                recommendation=i.get("recommendation", ""),
            )
            for i in data["issues"]
        ],
    )


def action_to_dict(action: EditAction) -> dict:
    if isinstance(action, ReorderScenes):
        return {"kind": "reorder_scenes", "order": list(action.order)}
    if isinstance(action, ReorderShots):
        return {"kind": "reorder_shots", "scene_id": action.scene_id, "order": list(action.order)}
    if isinstance(action, Remove):
        return {"kind": "remove", "shot_id": action.shot_id}
    if isinstance(action, Trim):
        return {
            "kind": "trim",
            "shot_id": action.shot_id,
            "source_start": _rt_dict(action.source_start),
            "source_duration": _rt_dict(action.source_duration),
        }
    if isinstance(action, Accelerate):
        return {"kind": "accelerate", "shot_id": action.shot_id, "speed": _frac_str(action.speed)}
    if isinstance(action, Retain):
        return {"kind": "retain", "shot_id": action.shot_id}
    raise TypeError(f"unknown edit action {action!r}")


def action_from_dict(data: dict) -> EditAction:
    kind = data["kind"]
    if kind == "reorder_scenes":
        return ReorderScenes(tuple(data["order"]))
    if kind == "reorder_shots":
        return ReorderShots(data["scene_id"], tuple(data["order"]))
    if kind == "remove":
        return Remove(data["shot_id"])
    if kind == "trim":
        return Trim(data["shot_id"], _rt(data["source_start"]), _rt(data["source_duration"]))
    if kind == "accelerate":
        return Accelerate(data["shot_id"], _frac(data["speed"]))
    if kind == "retain":
        return Retain(data["shot_id"])
    raise ValueError(f"unknown edit action kind {kind!r}")


def plan_to_dict(plan: EditPlan) -> dict:
    return {"actions": [action_to_dict(a) for a in plan.actions]}


def plan_from_dict(data: dict) -> EditPlan:
    return EditPlan(actions=[action_from_dict(a) for a in data["actions"]])


def cue_to_dict(cue: AudioCue) -> dict:
    return {
        "cue_id": cue.cue_id,
        "kind": cue.kind.value,
        "scale": cue.scale,
        "target_id": cue.target_id,
        "source": cue.source,
        "media_path": cue.media_path,
        "start_s": _frac_str(cue.start_s),
        "duration_s": _frac_str(cue.duration_s),
        "target_offset_s": _frac_str(cue.target_offset_s) if cue.target_offset_s is not None else None,
        "source_duration_s": _frac_str(cue.source_duration_s) if cue.source_duration_s is not None else None,
        "gain_db": cue.gain_db,
        "filters": cue.filters,
        "flags": cue.flags,
    }


def cue_from_dict(data: dict) -> AudioCue:
    return AudioCue(
        cue_id=data["cue_id"],
        kind=AudioKind(data["kind"]),
        scale=data["scale"],
        target_id=data["target_id"],
        source=data["source"],
        media_path=data["media_path"],
        start_s=_frac(data["start_s"]),
        duration_s=_frac(data["duration_s"]),
        target_offset_s=_frac(data["target_offset_s"]) if data.get("target_offset_s") else None,
        source_duration_s=_frac(data["source_duration_s"]) if data.get("source_duration_s") else None,
        gain_db=data.get("gain_db", 0.0),
        filters=list(data.get("filters", [])),
        flags=list(data.get("flags", [])),
    )


def scorecard_to_dict(card: ScoreCard) -> dict:
    return card.as_dict()


def scorecard_from_dict(data: dict) -> ScoreCard:
    return ScoreCard(scores=dict(data["scores"]), flags=list(data.get("flags", [])))


# -- stage files -----------------------------------------------------------------

_ARTIFACT_CODECS = {
    "synopsis": (storyboard_to_dict, storyboard_from_dict),
    "simplified": (storyboard_to_dict, storyboard_from_dict),
    "detailed": (storyboard_to_dict, storyboard_from_dict),
    "scene_blocks": (
        lambda blocks: [block_to_dict(b) for b in blocks],
        lambda data: [block_from_dict(b) for b in data],
    ),
    "generated_clips": (
        lambda clips: [clip_to_dict(c) for c in clips],
        lambda data: [clip_from_dict(c) for c in data],
    ),
    "timeline": (timeline_to_dict, timeline_from_dict),
    "audience_profile": (profile_to_dict, profile_from_dict),
    "review_report": (report_to_dict, report_from_dict),
    "edit_plan": (plan_to_dict, plan_from_dict),
    "cue_sheet": (
        lambda cues: [cue_to_dict(c) for c in cues],
        lambda data: [cue_from_dict(c) for c in data],
    ),
    "score_card": (scorecard_to_dict, scorecard_from_dict),
}


def state_to_dict(state: ProjectState) -> dict:
    """Whole-state snapshot (used for round-trip checks and debugging)."""
    out: dict[str, Any] = {"input": input_to_dict(state.input)}
    for name, (encode, _) in _ARTIFACT_CODECS.items():
        value = getattr(state, name)
        out[name] = encode(value) if value is not None else None
    out["stage_log"] = [asdict(e) for e in state.stage_log]
    return out


def state_from_dict(data: dict) -> ProjectState:
    state = ProjectState(input=input_from_dict(data["input"]))
    for name, (_, decode) in _ARTIFACT_CODECS.items():
        value = data.get(name)
        if value is not None:
            setattr(state, name, decode(value))
    state.stage_log = [StageLogEntry(**e) for e in data.get("stage_log", [])]
    return state


class ProjectStore:
    """Stage-file persistence for one project directory."""

    def __init__(self, root: Path):
        self.root = Path(root)

    @property
    def project_file(self) -> Path:
        return self.root / PROJECT_FILE

    def initialize(self, project_input: ProjectInput) -> None:
        if self.project_file.exists():
            raise FileExistsError(f"project already initialized at {self.root}")
        self.root.mkdir(parents=True, exist_ok=True)
        for sub in ("stages", "assets", "transcripts", "index", "exports"):
            (self.root / sub).mkdir(exist_ok=True)
        self._write_project(
            {"input": input_to_dict(project_input), "stage_log": [], "stages": {}}
        )

    def _write_project(self, doc: dict) -> None:
        self.project_file.write_text(
            json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    def _read_project(self) -> dict:
        if not self.project_file.exists():
            raise FileNotFoundError(f"no project at {self.root} (missing {PROJECT_FILE})")
        return json.loads(self.project_file.read_text(encoding="utf-8"))

    def next_version(self, stage: str) -> int:
        pattern = re.compile(rf"^{re.escape(stage)}\.(\d+)\.json$")
        best = 0
        stages_dir = self.root / "stages"
        if stages_dir.exists():
            for entry in stages_dir.iterdir():
                m = pattern.match(entry.name)
                if m:
                    best = max(best, int(m.group(1)))
        return best + 1

    def write_stage(
        self,
        stage: str,
        artifacts: dict[str, Any],
        log_entry: StageLogEntry,
    ) -> Path:
        """Persist one stage's artifacts as a new version and update the index."""
        doc = self._read_project()
        version = self.next_version(stage)
        encoded = {}
        for name, value in artifacts.items():
            encode, _ = _ARTIFACT_CODECS[name]
            encoded[name] = encode(value) if value is not None else None
        stage_path = self.root / "stages" / f"{stage}.{version}.json"
        stage_path.write_text(
            json.dumps({"stage": stage, "artifacts": encoded}, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        doc["stages"][stage] = stage_path.name
        doc.setdefault("stage_log", []).append(asdict(log_entry))
        self._write_project(doc)
        return stage_path

    def load_state(self, stage_order: list[str]) -> ProjectState:
        """Compose current state from the newest version of each stage, in order."""
        doc = self._read_project()
        state = ProjectState(input=input_from_dict(doc["input"]))
        for stage in stage_order:
            name = doc.get("stages", {}).get(stage)
            if name is None:
                continue
            stage_doc = json.loads((self.root / "stages" / name).read_text(encoding="utf-8"))
            for artifact, value in stage_doc["artifacts"].items():
                if value is None:
                    continue
                _, decode = _ARTIFACT_CODECS[artifact]
                setattr(state, artifact, decode(value))
        state.stage_log = [StageLogEntry(**e) for e in doc.get("stage_log", [])]
        return state

    def completed_stages(self) -> list[str]:
        doc = self._read_project()
        return [e["stage"] for e in doc.get("stage_log", [])]

    def project_input(self) -> ProjectInput:
        return input_from_dict(self._read_project()["input"])
