"""Stage runner: executes the production pipeline over a persisted project directory.

Stages run in a fixed order; each consumes the artifacts of its predecessors,
persists its own as a new stage-file version, and appends to the stage log
with the digest of the run's provider transcript.
"""

from __future__ import annotations

import datetime
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional

from . import camera_rag, production, rhythm, structuring
from .config import RunConfig
from .model import AudioKind, ProjectState, StageLogEntry
from .persist import ProjectStore
from .providers.base import ProviderSuite, ProviderUnavailable
from .providers.mock import mock_suite
from .providers.transcript import Transcript, recording_suite
from .sound import cues as sound_cues
from .sound.library import AudioLibrary, build_audio_library, read_audio_library_jsonl
from .timeline_io import save_otio

log = logging.getLogger(__name__)

STAGES = ("structure", "camera", "produce", "rough", "review", "finecut", "sound", "export")


class StageError(RuntimeError):
    """A stage cannot run (usually: upstream artifacts missing)."""


@dataclass
class PipelineContext:
    store: ProjectStore
    config: RunConfig
    suite: ProviderSuite
    transcript: Transcript
    _corpus_index: Optional[camera_rag.VectorIndex] = None
    _audio_library: Optional[AudioLibrary] = None

    @property
    def root(self) -> Path:
        return self.store.root

    def corpus_index(self) -> camera_rag.VectorIndex:
        if self._corpus_index is not None:
            return self._corpus_index
        index_path = self.root / "index" / "corpus.idx.json"
        corpus_path = self.config.corpus_path
        if corpus_path is not None:
            corpus = camera_rag.read_corpus_jsonl(self._resolve(corpus_path))
            fresh_hash = camera_rag.corpus_hash(corpus)
            if index_path.exists():
                index = camera_rag.load_index(index_path)
                if index.metadata.get("corpus_hash") == fresh_hash:
                    self._corpus_index = index
                    return index
                log.info("corpus changed; rebuilding index")
            index = camera_rag.build_index(corpus, self.suite.embedding)
            camera_rag.save_index(index, index_path)
            self._corpus_index = index
            return index
        if index_path.exists():
            self._corpus_index = camera_rag.load_index(index_path)
            return self._corpus_index
        raise StageError(
            "no film-reference corpus available: set corpus_path in config.json or run `index build-corpus`"
        )

    def audio_library(self) -> AudioLibrary:
        if self._audio_library is not None:
            return self._audio_library
        if self.config.audio_library_path is not None:
            records = read_audio_library_jsonl(self._resolve(self.config.audio_library_path))
            self._audio_library = build_audio_library(records, self.suite.embedding)
        else:
            log.warning("no audio library configured; retrieval-backed cues will be omitted")
            self._audio_library = AudioLibrary(assets={}, indexes={})
        return self._audio_library

    def _resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.root / p


# -- stage implementations ----------------------------------------------------


def _stage_structure(state: ProjectState, ctx: PipelineContext) -> dict[str, Any]:
    chat = ctx.suite.chat
    synopsis = structuring.expand_synopsis(state.input, chat)
    simplified = structuring.expand_simplified(synopsis, state.input, chat)
    detailed = structuring.expand_detailed(simplified, state.input, chat)
    blocks = structuring.segment_scene_blocks(detailed, state.input, chat)
    return {"synopsis": synopsis, "simplified": simplified, "detailed": detailed, "scene_blocks": blocks}


def _stage_camera(state: ProjectState, ctx: PipelineContext) -> dict[str, Any]:
    index = ctx.corpus_index()
    replanned = []
    for block in state.scene_blocks:
        query = camera_rag.serialize_query(block)
        refs = camera_rag.retrieve(index, query, ctx.suite.embedding, k=ctx.config.retrieval_k)
        replanned.append(
            camera_rag.replan_shots(
                block, refs, ctx.suite.chat, rounds=ctx.config.replan_rounds, index=index
            )
        )
    return {"scene_blocks": replanned}


def _stage_produce(state: ProjectState, ctx: PipelineContext) -> dict[str, Any]:
    clips = []
    for block in state.scene_blocks:
        clips.extend(
            production.generate_scene(
                block,
                state.input,
                ctx.suite.video,
                assets_dir=ctx.root / "assets",
                max_workers=ctx.config.concurrency,
                duration_hint=ctx.config.duration_hint_seconds,
            )
        )
    clips = [production.caption_clip(c, ctx.suite.media_review) for c in clips]
    captions_path = ctx.root / "stages" / "captions.json"
    captions_path.write_text(
        json.dumps({c.shot_id: c.text_description for c in clips}, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return {"generated_clips": clips}


def _stage_rough(state: ProjectState, ctx: PipelineContext) -> dict[str, Any]:
    timeline = rhythm.assemble_rough_cut(
        state.generated_clips,
        state.scene_blocks,
        ctx.suite.voice,
        global_rate=ctx.config.global_rate,
        voice_id=ctx.config.voice_id,
    )
    return {"timeline": timeline}


def _stage_review(state: ProjectState, ctx: PipelineContext) -> dict[str, Any]:
    archetype = state.input.target_audience or "general audience"
    profile = rhythm.build_audience_profile(archetype, ctx.suite.chat, ctx.suite.search)
    preview = rhythm.render_preview(
        state.timeline, state.scene_blocks, ctx.root / "assets" / "previews" / "rough_cut.json"
    )
    report = rhythm.review_rough_cut(
        state.timeline, profile, preview, ctx.suite.media_review, ctx.suite.chat
    )
    return {"audience_profile": profile, "review_report": report}


def _stage_finecut(state: ProjectState, ctx: PipelineContext) -> dict[str, Any]:
    """One review→edit pass by default; extra cycles re-review the new cut."""
    captions = {c.shot_id: c.text_description for c in state.generated_clips}
    min_seconds = Fraction(ctx.config.min_shot_seconds).limit_denominator(1000)
    timeline = state.timeline
    report = state.review_report
    plan = None
    for cycle in range(max(1, ctx.config.review_cycles)):
        if cycle > 0:
            preview = rhythm.render_preview(
                timeline,
                state.scene_blocks,
                ctx.root / "assets" / "previews" / f"cycle_{cycle}.json",
            )
            report = rhythm.review_rough_cut(
                timeline, state.audience_profile, preview, ctx.suite.media_review, ctx.suite.chat
            )
        plan = rhythm.plan_fine_cut(report, captions, timeline, ctx.suite.chat, min_shot_seconds=min_seconds)
        timeline = rhythm.apply_edit_plan(timeline, plan, min_shot_seconds=min_seconds)
    return {"edit_plan": plan, "timeline": timeline}


def _stage_sound(state: ProjectState, ctx: PipelineContext) -> dict[str, Any]:
    library = ctx.audio_library()
    embedder = ctx.suite.embedding
    timeline = state.timeline
    captions = {c.shot_id: c.text_description for c in state.generated_clips}
    clips_by_shot = {c.shot_id: c for c in state.generated_clips}
    cues: list[sound_cues.AudioCue] = []
    scene_intervals = timeline.scene_intervals()
    for block in sorted(state.scene_blocks, key=lambda b: b.index):
        interval = scene_intervals.get(block.id)
        if interval is None:
            continue  # every shot of the scene was cut
        cues.extend(sound_cues.plan_scene_cues(block, interval, library, embedder, ctx.suite.chat))
    cues.extend(
        sound_cues.plan_vo_cues(
            state.scene_blocks,
            captions,
            state.review_report,
            timeline,
            ctx.suite.chat,
            ctx.suite.voice,
            voice_id=ctx.config.voice_id,
        )
    )
    for clip in timeline.video_track:
        shot_id = clip.shot_id()
        if shot_id is None or shot_id not in clips_by_shot:
            continue
        edit = sound_cues.ShotEditInfo.from_clip(clip)
        cues.extend(
            sound_cues.plan_intra_shot_cues(
                clips_by_shot[shot_id], edit, library, embedder, ctx.suite.media_review
            )
        )
    targets = {AudioKind(k): v for k, v in ctx.config.loudness_targets.items()}
    sound_cues.normalize_cues(cues, targets)
    sound_cues.harmonize_frequencies(cues)
    final = sound_cues.build_cue_sheet(cues, timeline)
    return {"cue_sheet": cues, "timeline": final}


def _stage_export(state: ProjectState, ctx: PipelineContext) -> dict[str, Any]:
    path = ctx.root / "exports" / "film.otio"
    save_otio(state.timeline, path, project_meta={"project": state.timeline.name}, media_root=ctx.root)
    log.info("exported %s", path)
    return {}


_STAGE_FUNCS: dict[str, Callable[[ProjectState, PipelineContext], dict[str, Any]]] = {
    "structure": _stage_structure,
    "camera": _stage_camera,
    "produce": _stage_produce,
    "rough": _stage_rough,
    "review": _stage_review,
    "finecut": _stage_finecut,
    "sound": _stage_sound,
    "export": _stage_export,
}

# Artifacts that must already exist before a stage may run.
_STAGE_REQUIRES: dict[str, tuple[str, ...]] = {
    "structure": (),
    "camera": ("scene_blocks",),
    "produce": ("scene_blocks",),
    "rough": ("generated_clips",),
    "review": ("timeline",),
    "finecut": ("audience_profile", "review_report", "timeline"),
    "sound": ("edit_plan", "timeline"),
    "export": ("timeline",),
}


def build_suite(ctx_root: Path, config: RunConfig, offline: bool) -> ProviderSuite:
    if offline:
        return mock_suite(
            ctx_root / "assets",
            seed=config.seed,
            embedding_dim=config.embedding_dim,
            concurrency=config.concurrency,
        )
    from .providers.http import HttpChat, HttpEmbedding, HttpSearch

    required = ("chat", "embedding", "search")
    missing = [name for name in required if name not in config.providers]
    if missing:
        raise ProviderUnavailable(
            f"live mode needs provider configs for {missing}; run with --offline or extend config.json"
        )
    # Media-producing services have no generic live adapter; offline mocks
    # stand in for them until a deployment wires vendor-specific ones.
    offline_media = mock_suite(ctx_root / "assets", seed=config.seed, embedding_dim=config.embedding_dim)
    return ProviderSuite(
        chat=HttpChat(config.providers["chat"]),
        embedding=HttpEmbedding(config.providers["embedding"]),
        media_review=offline_media.media_review,
        video=offline_media.video,
        voice=offline_media.voice,
        search=HttpSearch(config.providers["search"]),
    )


def _next_transcript_path(root: Path) -> Path:
    transcripts = root / "transcripts"
    transcripts.mkdir(parents=True, exist_ok=True)
    n = 1 + sum(1 for p in transcripts.iterdir() if p.suffix == ".jsonl")
    return transcripts / f"run_{n:03d}.jsonl"


def run_pipeline(
    project_dir: Path,
    config: RunConfig,
    from_stage: Optional[str] = None,
    to_stage: Optional[str] = None,
    offline: bool = False,
    suite: Optional[ProviderSuite] = None,
) -> ProjectState:
    """Run the stage range [from_stage, to_stage] (defaults: structure → export)."""
    store = ProjectStore(Path(project_dir))
    start = from_stage or STAGES[0]
    stop = to_stage or STAGES[-1]
    for name in (start, stop):
        if name not in STAGES:
            raise ValueError(f"unknown stage {name!r}; expected one of {', '.join(STAGES)}")
    i0, i1 = STAGES.index(start), STAGES.index(stop)
    if i0 > i1:
        raise ValueError(f"--from {start} comes after --to {stop}")

    state = store.load_state(list(STAGES))
    if suite is None:
        suite = build_suite(store.root, config, offline)
    transcript = Transcript(path=_next_transcript_path(store.root))
    recorded = recording_suite(suite, transcript, store.root / "assets")
    ctx = PipelineContext(store=store, config=config, suite=recorded, transcript=transcript)

    for stage in STAGES[i0 : i1 + 1]:
        missing = [a for a in _STAGE_REQUIRES[stage] if getattr(state, a) is None]
        if missing:
            raise StageError(f"stage {stage!r}: missing upstream stage artifacts {missing}")
        log.info("running stage %s", stage)
        artifacts = _STAGE_FUNCS[stage](state, ctx)
        for name, value in artifacts.items():
            setattr(state, name, value)
        entry = StageLogEntry(
            stage=stage,
            timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
            transcript_digest=transcript.digest(),
        )
        state.stage_log.append(entry)
        store.write_stage(stage, artifacts, entry)
    return state
