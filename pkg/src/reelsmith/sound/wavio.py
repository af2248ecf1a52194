"""Linear-PCM WAV reading and writing (16/24-bit) on top of the stdlib wave module."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Load a PCM WAV as float64 in [-1, 1], shape (samples, channels)."""
    with wave.open(str(path), "rb") as wf:
        channels = wf.getnchannels()
        width = wf.getsampwidth()
        rate = wf.getframerate()
        raw = wf.readframes(wf.getnframes())
    if width == 2:
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 3:
        as_bytes = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3)
        ints = (
            as_bytes[:, 0].astype(np.int32)
            | (as_bytes[:, 1].astype(np.int32) << 8)
            | (as_bytes[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        data = ints.astype(np.float64) / float(1 << 23)
    else:
        raise ValueError(f"unsupported sample width {width * 8} bits in {path}")
    return data.reshape(-1, channels), rate


def write_wav(path: str | Path, data: np.ndarray, rate: int, bits: int = 16) -> None:
    """Write float data in [-1, 1] as 16- or 24-bit PCM."""
    if bits not in (16, 24):
        raise ValueError(f"unsupported bit depth {bits}")
    if data.ndim == 1:
        data = data[:, None]
    clipped = np.clip(data, -1.0, 1.0)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(data.shape[1])
        wf.setframerate(rate)
        if bits == 16:
            wf.setsampwidth(2)
            pcm = np.round(clipped * 32767.0).astype("<i2")
            wf.writeframes(pcm.tobytes())
        else:
            wf.setsampwidth(3)
            ints = np.round(clipped * float((1 << 23) - 1)).astype(np.int32)
            flat = ints.reshape(-1)
            packed = np.empty((flat.size, 3), dtype=np.uint8)
            packed[:, 0] = flat & 0xFF
            packed[:, 1] = (flat >> 8) & 0xFF
            packed[:, 2] = (flat >> 16) & 0xFF
            wf.writeframes(packed.tobytes())


def wav_duration_seconds(path: str | Path) -> float:
    with wave.open(str(path), "rb") as wf:
        return wf.getnframes() / wf.getframerate()
