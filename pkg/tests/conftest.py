"""Shared fixtures: the bundled project inputs, mock provider suites, and
random generators for timelines and edit plans."""

from __future__ import annotations

import json
import os
import random
import sys
from datetime import timedelta
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

from reelsmith.cli import main as cli_main
from reelsmith.model import RationalTime, Timeline, TimelineClip
from reelsmith.providers.mock import mock_suite
from reelsmith.rhythm import Accelerate, EditPlan, Remove, ReorderShots, Retain, Trim

FIXTURES = Path(__file__).parent / "fixtures"
SCRIPTS = Path(__file__).parent.parent / "scripts"

settings.register_profile("ci", deadline=timedelta(milliseconds=2000))
settings.register_profile("dev", max_examples=25)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

sys.path.insert(0, str(SCRIPTS))
import make_fixture_media  # noqa: E402


@pytest.fixture(scope="session")
def fixture_media() -> Path:
    """The bundled fixture directory with its audio assets materialized."""
    make_fixture_media.ensure_audio_assets(FIXTURES / "audio")
    return FIXTURES


@pytest.fixture()
def suite(tmp_path):
    return mock_suite(tmp_path / "assets", seed=0)


def init_fixture_project(root: Path, fixtures: Path, seed: int = 0) -> Path:
    """`init` + config wiring for the bundled theme/refs/corpus/library."""
    rc = cli_main(
        [
            "init",
            str(root),
            "--theme",
            str(fixtures / "theme.txt"),
            "--char",
            f"Mara={fixtures / 'mara.png'}",
            "--char",
            f"Theo={fixtures / 'theo.png'}",
            "--loc",
            f"the lighthouse={fixtures / 'lighthouse.png'}",
            "--audience",
            "short-drama audience",
            "--seed",
            str(seed),
        ]
    )
    assert rc == 0
    config_path = root / "config.json"
    config = json.loads(config_path.read_text())
    config["corpus_path"] = str(fixtures / "corpus.jsonl")
    config["audio_library_path"] = str(fixtures / "audio_library.jsonl")
    config_path.write_text(json.dumps(config, indent=2, sort_keys=True))
    return root


@pytest.fixture(scope="session")
def fixture_project(tmp_path_factory, fixture_media) -> Path:
    """One offline pipeline run over the bundled fixture, shared read-only."""
    root = tmp_path_factory.mktemp("project")
    init_fixture_project(root, fixture_media)
    assert cli_main(["run", "--project", str(root), "--offline"]) == 0
    return root


# -- random timeline / edit-plan construction ---------------------------------


def random_timeline(rng: random.Random, max_scenes: int = 3, max_shots: int = 4) -> Timeline:
    """A valid gapless video timeline with labeled scenes and shots."""
    timeline = Timeline(name="t", global_rate=30)
    cursor = RationalTime(0, 30)
    for scene_index in range(rng.randint(1, max_scenes)):
        scene_id = f"scene_{scene_index}"
        for shot_index in range(rng.randint(1, max_shots)):
            frames = rng.randint(45, 240)  # 1.5 s .. 8 s at 30 fps
            clip = TimelineClip(
                source=f"assets/video/{scene_id}_shot_{shot_index}.clip.json",
                source_start=RationalTime(0, 30),
                source_duration_used=RationalTime(frames, 30),
                timeline_start=cursor,
                source_duration=RationalTime(frames, 30),
                metadata={"shot_id": f"{scene_id}_shot_{shot_index}", "scene_id": scene_id},
            )
            timeline.video_track.append(clip)
            cursor = clip.timeline_end()
    return timeline


def random_plan(rng: random.Random, timeline: Timeline, min_seconds: Fraction = Fraction(1, 2)) -> EditPlan:
    """A valid random plan over the timeline: reorders, removals, and durational actions."""
    by_scene: dict[str, list[TimelineClip]] = {}
    for clip in timeline.video_track:
        by_scene.setdefault(clip.scene_id() or "", []).append(clip)
    actions = []
    for scene_id, clips in by_scene.items():
        if len(clips) > 1 and rng.random() < 0.4:
            order = [c.shot_id() for c in clips]
            rng.shuffle(order)
            actions.append(ReorderShots(scene_id, tuple(order)))
    removable = [c for c in timeline.video_track]
    rng.shuffle(removable)
    removed = set()
    for clip in removable[: rng.randint(0, max(0, len(removable) - 1))]:
        if rng.random() < 0.4:
            removed.add(clip.shot_id())
            actions.append(Remove(clip.shot_id()))
    for clip in timeline.video_track:
        shot_id = clip.shot_id()
        if shot_id in removed:
            continue
        roll = rng.random()
        duration = clip.source_duration_used.to_seconds()
        if roll < 0.25:
            # trim to a sub-range at least min_seconds long
            max_trim = duration - min_seconds
            start = Fraction(rng.randint(0, int(max_trim * 30)), 30)
            length = duration - start
            if rng.random() < 0.5 and length - Fraction(1, 30) >= min_seconds:
                length -= Fraction(1, 30)
            actions.append(
                Trim(shot_id, RationalTime.from_seconds(start), RationalTime.from_seconds(length))
            )
        elif roll < 0.5:
            speed = rng.choice([Fraction(3, 2), Fraction(2), Fraction(5, 4)])
            if duration / speed >= min_seconds:
                actions.append(Accelerate(shot_id, speed))
            else:
                actions.append(Retain(shot_id))
        else:
            actions.append(Retain(shot_id))
    return EditPlan(actions)
