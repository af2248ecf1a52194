"""Coarse-to-fine script chain: theme → synopsis → simplified → detailed → scene blocks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

from .model import ProjectInput, SceneBlock, ShotSpec, ShotType
from .prompts import build_messages, load_template
from .providers.base import MalformedOutput

ENTRY_TAGS = ("primary", "contextual", "metaphorical")

SYNOPSIS_SCHEMA = {
    "type": "object",
    "properties": {"synopsis": {"type": "string", "minLength": 1}},
    "required": ["synopsis"],
}
SIMPLIFIED_SCHEMA = {
    "type": "object",
    "properties": {"simplified": {"type": "string", "minLength": 1}},
    "required": ["simplified"],
}
DETAILED_SCHEMA = {
    "type": "object",
    "properties": {
        "entries": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "tag": {"type": "string", "enum": list(ENTRY_TAGS)},
                },
                "required": ["text", "tag"],
            },
        }
    },
    "required": ["entries"],
}
BLOCKS_SCHEMA = {
    "type": "object",
    "properties": {
        "blocks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "entry_indices": {"type": "array", "minItems": 1, "items": {"type": "integer"}},
                    "location": {"type": "string", "minLength": 1},
                    "time_of_day": {"type": "string", "minLength": 1},
                    "characters": {"type": "array", "items": {"type": "string"}},
                    "visual_elements": {"type": "array", "items": {"type": "string"}},
                    "narrative_objective": {"type": "string", "minLength": 1},
                    "rough_sound_note": {"type": "string", "minLength": 1},
                },
                "required": [
                    "entry_indices",
                    "location",
                    "time_of_day",
                    "characters",
                    "visual_elements",
                    "narrative_objective",
                    "rough_sound_note",
                ],
            },
        }
    },
    "required": ["blocks"],
}


@dataclass
class StoryboardEntry:
    text: str
    tag: str


@dataclass
class StoryboardDoc:
    phase: str  # synopsis | simplified | detailed
    body: Union[str, list[StoryboardEntry]]

    def text(self) -> str:
        if isinstance(self.body, str):
            return self.body
        return "\n".join(e.text for e in self.body)


def _checked_chat(chat: Any, messages: list[dict[str, str]], schema: dict, check, describe: str) -> Any:
    """One semantic-level reprompt on top of the provider's schema handling."""
    value = chat.chat_complete(messages, schema=schema)
    problem = check(value)
    if problem is None:
        return value
    retry = messages + [
        {"role": "assistant", "content": str(value)},
        {"role": "user", "content": f"That reply was unusable: {problem}. Produce a corrected JSON reply."},
    ]
    value = chat.chat_complete(retry, schema=schema)
    problem = check(value)
    if problem is not None:
        raise MalformedOutput(f"{describe}: {problem}")
    return value


def expand_synopsis(project_input: ProjectInput, chat: Any) -> StoryboardDoc:
    """Phase 1: theme to synopsis; must introduce every named character."""
    if not project_input.theme_text.strip():
        raise ValueError("theme_text must be non-empty")
    names = [r.name for r in project_input.character_refs]
    payload = {
        "theme": project_input.theme_text,
        "characters": names,
        "locations": [r.name for r in project_input.location_refs],
    }

    def check(value: dict) -> str | None:
        missing = [n for n in names if n not in value["synopsis"]]
        return f"missing character names {missing}" if missing else None

    value = _checked_chat(
        chat, build_messages(load_template("structuring/synopsis.txt"), payload), SYNOPSIS_SCHEMA, check, "synopsis"
    )
    return StoryboardDoc(phase="synopsis", body=value["synopsis"])


def expand_simplified(synopsis: StoryboardDoc, project_input: ProjectInput, chat: Any) -> StoryboardDoc:
    """Phase 2: add background, causal chain, developments, outcome."""
    names = [r.name for r in project_input.character_refs if r.name in synopsis.text()]
    payload = {"synopsis": synopsis.text(), "characters": names}

    def check(value: dict) -> str | None:
        missing = [n for n in names if n not in value["simplified"]]
        return f"dropped character names {missing}" if missing else None

    value = _checked_chat(
        chat, build_messages(load_template("structuring/simplified.txt"), payload), SIMPLIFIED_SCHEMA, check, "simplified"
    )
    return StoryboardDoc(phase="simplified", body=value["simplified"])


def expand_detailed(simplified: StoryboardDoc, project_input: ProjectInput, chat: Any) -> StoryboardDoc:
    """Phase 3: concrete tagged shot entries; at least one primary."""
    payload = {
        "simplified": simplified.text(),
        "characters": [r.name for r in project_input.character_refs],
        "locations": [r.name for r in project_input.location_refs],
    }

    def check(value: dict) -> str | None:
        if not any(e["tag"] == "primary" for e in value["entries"]):
            return "no primary entries"
        return None

    value = _checked_chat(
        chat, build_messages(load_template("structuring/detailed.txt"), payload), DETAILED_SCHEMA, check, "detailed"
    )
    return StoryboardDoc(
        phase="detailed",
        body=[StoryboardEntry(text=e["text"], tag=e["tag"]) for e in value["entries"]],
    )


def segment_scene_blocks(detailed: StoryboardDoc, project_input: ProjectInput, chat: Any) -> list[SceneBlock]:
    """Phase 4: partition detailed entries into ordered scene blocks.

    Every entry index must be assigned exactly once, in chronological order;
    the shot conservation invariant (entries == total shots) holds by
    construction.
    """
    if not isinstance(detailed.body, list) or not detailed.body:
        raise ValueError("detailed storyboard has no entries")
    entries = [{"text": e.text, "tag": e.tag} for e in detailed.body]
    payload = {
        "entries": entries,
        "characters": [r.name for r in project_input.character_refs],
        "locations": [r.name for r in project_input.location_refs],
        "theme": project_input.theme_text,
    }
    n = len(entries)

    def check(value: dict) -> str | None:
        flat: list[int] = []
        for block in value["blocks"]:
            flat.extend(block["entry_indices"])
        if flat != list(range(n)):
            return f"entry indices {flat} are not a chronological partition of 0..{n - 1}"
        return None

    value = _checked_chat(
        chat, build_messages(load_template("structuring/scene_blocks.txt"), payload), BLOCKS_SCHEMA, check, "scene blocks"
    )
    blocks: list[SceneBlock] = []
    for i, raw in enumerate(value["blocks"]):
        block_id = f"scene_{i}"
        shots = [
            ShotSpec(
                id=f"scene_{i}_shot_{j}",
                scene_id=block_id,
                content_prompt=entries[idx]["text"],
                shot_type=ShotType.UNSPECIFIED,
                reference_bindings=_bindings(raw, project_input),
            )
            for j, idx in enumerate(raw["entry_indices"])
        ]
        blocks.append(
            SceneBlock(
                id=block_id,
                index=i,
                shot_prompts=shots,
                time_of_day=raw["time_of_day"],
                location=raw["location"],
                characters=list(raw["characters"]),
                visual_elements=list(raw["visual_elements"]),
                narrative_objective=raw["narrative_objective"],
                rough_sound_note=raw["rough_sound_note"],
            )
        )
    return blocks


def _bindings(raw_block: dict, project_input: ProjectInput) -> list[str]:
    """Resolvable reference names shared by all shots of the block."""
    known = project_input.reference_names()
    names = [c for c in raw_block["characters"] if c in known]
    if raw_block["location"] in known:
        names.append(raw_block["location"])
    return names


def character_names_in(doc_or_blocks: Any, project_input: ProjectInput) -> set[str]:
    """Which known character names a stage artifact mentions (refinement metric)."""
    if isinstance(doc_or_blocks, StoryboardDoc):
        text = doc_or_blocks.text()
    else:
        text = " ".join(
            " ".join([b.narrative_objective, " ".join(b.characters)] + [s.content_prompt for s in b.shot_prompts])
            for b in doc_or_blocks
        )
    return {r.name for r in project_input.character_refs if r.name in text}
