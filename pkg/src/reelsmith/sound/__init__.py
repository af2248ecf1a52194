"""Sound design: asset library, multi-scale cue planning, loudness, and mixing."""

from .cues import (
    AudioCue,
    ShotEditInfo,
    DEFAULT_TARGETS_LUFS,
    build_cue_sheet,
    harmonize_frequencies,
    normalize_cues,
    normalize_track,
    plan_intra_shot_cues,
    plan_scene_cues,
    plan_vo_cues,
)
from .library import (
    AudioAsset,
    AudioLibrary,
    build_audio_library,
    load_audio_library,
    read_audio_library_jsonl,
    save_audio_library,
)
from .loudness import LoudnessReading, measure_loudness, true_peak_dbfs
from .wavio import read_wav, wav_duration_seconds, write_wav

__all__ = [
    "AudioAsset",
    "AudioCue",
    "AudioLibrary",
    "DEFAULT_TARGETS_LUFS",
    "LoudnessReading",
    "ShotEditInfo",
    "build_audio_library",
    "build_cue_sheet",
    "harmonize_frequencies",
    "load_audio_library",
    "measure_loudness",
    "normalize_cues",
    "normalize_track",
    "plan_intra_shot_cues",
    "plan_scene_cues",
    "plan_vo_cues",
    "read_audio_library_jsonl",
    "read_wav",
    "save_audio_library",
    "true_peak_dbfs",
    "wav_duration_seconds",
    "write_wav",
]
