"""Rubric-driven judging: one media review per criterion, parsed into a ScoreCard."""

from __future__ import annotations

import logging
import re
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from ..prompts import load_template
from ..providers.base import MalformedOutput
from .scorecard import CRITERIA, MAX_SCORE, MIN_SCORE, ScoreCard

log = logging.getLogger(__name__)

SCORE_LINE = re.compile(r"score:\s*([0-9]+(?:\.[0-9]+)?)", re.IGNORECASE)


def rubric_filename(code: str) -> str:
    return code.replace("/", "-") + ".txt"


def load_rubrics(directory: Optional[Path] = None) -> dict[str, str]:
    """Rubric text per criterion code, from a directory or the packaged set."""
    rubrics: dict[str, str] = {}
    for code in CRITERIA:
        if directory is not None:
            text = (Path(directory) / rubric_filename(code)).read_text(encoding="utf-8")
        else:
            text = (
                resources.files(__package__)
                .joinpath("rubrics")
                .joinpath(rubric_filename(code))
                .read_text(encoding="utf-8")
            )
        rubrics[code] = text.strip()
    return rubrics


def _parse_score(text: str, code: str) -> tuple[float, list[str]]:
    m = SCORE_LINE.search(text)
    if not m:
        raise MalformedOutput(f"criterion {code}: no score line in judge output")
    value = float(m.group(1))
    flags = []
    if value * 2 != int(value * 2):
        value = round(value * 2) / 2
        flags.append(f"{code}:rounded_to_half")
    if value < MIN_SCORE:
        flags.append(f"{code}:clamped_from_{value}")
        value = MIN_SCORE
    elif value > MAX_SCORE:
        flags.append(f"{code}:clamped_from_{value}")
        value = MAX_SCORE
    return value, flags


def judge_film(
    media: str,
    rubrics: dict[str, str],
    media_review: Any,
    script_text: Optional[str] = None,
) -> ScoreCard:
    """Score the film once per criterion with its rubric verbatim in the prompt.

    `script_text`, when given, is shown to the judge for faithfulness scoring.
    Out-of-range scores are clamped and flagged rather than rejected.
    """
    if not Path(media).exists():
        raise FileNotFoundError(f"media not found: {media}")
    missing = [c for c in CRITERIA if c not in rubrics]
    if missing:
        raise ValueError(f"missing rubrics for criteria: {missing}")
    template = load_template("scoring/judge.txt")
    scores: dict[str, float] = {}
    flags: list[str] = []
    for code in CRITERIA:
        prompt = template.format(code=code, rubric=rubrics[code])
        if script_text:
            prompt += f"\n\noriginal script:\n{script_text}"
        try:
            text = media_review.review_media(media, prompt)
            value, value_flags = _parse_score(text, code)
        except MalformedOutput:
            text = media_review.review_media(
                media, prompt + "\n\nReply with exactly two lines: 'score: <1-5>' then 'rationale: ...'."
            )
            value, value_flags = _parse_score(text, code)
        scores[code] = value
        flags.extend(value_flags)
    if flags:
        log.warning("judge output needed adjustment: %s", flags)
    return ScoreCard(scores=scores, flags=flags)
