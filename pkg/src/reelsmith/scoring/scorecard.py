"""Score cards over the twelve film criteria, with the two derived aggregates.

Derived metrics are weighted means in which the technique pair (CT, AVR)
jointly counts as a single sixth item alongside its five companion criteria:
  camera language   = (SF + NC + VQ + CC + PLC + (CT + AVR)/2) / 6
  cinematic rhythm  = (V/AQ + NP + VAC + CD + OQ + (CT + AVR)/2) / 6
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

CRITERIA = ("SF", "NC", "VQ", "CC", "PLC", "V/AQ", "CT", "AVR", "NP", "VAC", "CD", "OQ")

CRITERION_NAMES = {
    "SF": "Script Faithfulness",
    "NC": "Narrative Coherence",
    "VQ": "Visual Quality",
    "CC": "Character Consistency",
    "PLC": "Physical Law Compliance",
    "V/AQ": "Voice/Audio Quality",
    "CT": "Cinematic Techniques",
    "AVR": "Audio-Visual Richness",
    "NP": "Narrative Pacing",
    "VAC": "Video-Audio Coordination",
    "CD": "Compelling Degree",
    "OQ": "Overall Quality",
}

CAMERA_LANGUAGE_CRITERIA = ("SF", "NC", "VQ", "CC", "PLC")
RHYTHM_CRITERIA = ("V/AQ", "NP", "VAC", "CD", "OQ")
SHARED_PAIR = ("CT", "AVR")

MIN_SCORE, MAX_SCORE = 1.0, 5.0


def round_display(value: float, places: int = 2) -> float:
    """Half-up decimal rounding for displayed/table values."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def derive_metrics(scores: dict[str, float]) -> tuple[float, float, float]:
    """(camera language, cinematic rhythm, 12-criterion average), unrounded."""
    missing = [c for c in CRITERIA if c not in scores]
    if missing:
        raise ValueError(f"missing criteria: {missing}")
    pair = sum(scores[c] for c in SHARED_PAIR) / len(SHARED_PAIR)
    cl = (sum(scores[c] for c in CAMERA_LANGUAGE_CRITERIA) + pair) / 6.0
    crh = (sum(scores[c] for c in RHYTHM_CRITERIA) + pair) / 6.0
    avg = sum(scores[c] for c in CRITERIA) / len(CRITERIA)
    return cl, crh, avg


@dataclass
class ScoreCard:
    scores: dict[str, float]
    flags: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        missing = [c for c in CRITERIA if c not in self.scores]
        if missing:
            raise ValueError(f"score card missing criteria: {missing}")
        for code, value in self.scores.items():
            if not MIN_SCORE <= value <= MAX_SCORE:
                raise ValueError(f"criterion {code} score {value} outside [1, 5]")

    @property
    def camera_language(self) -> float:
        return derive_metrics(self.scores)[0]

    @property
    def cinematic_rhythm(self) -> float:
        return derive_metrics(self.scores)[1]

    @property
    def average(self) -> float:
        return derive_metrics(self.scores)[2]

    def as_dict(self) -> dict:
        cl, crh, avg = derive_metrics(self.scores)
        return {
            "scores": {c: self.scores[c] for c in CRITERIA},
            "derived": {"CL": round_display(cl), "CRh": round_display(crh)},
            "avg": round_display(avg),
            "flags": list(self.flags),
        }

    def render_table(self) -> str:
        cl, crh, avg = derive_metrics(self.scores)
        rows = [f"{code:6s} {CRITERION_NAMES[code]:28s} {self.scores[code]:.2f}" for code in CRITERIA]
        rows.append("-" * 42)
        rows.append(f"{'CL':6s} {'Camera Language (derived)':28s} {round_display(cl):.2f}")
        rows.append(f"{'CRh':6s} {'Cinematic Rhythm (derived)':28s} {round_display(crh):.2f}")
        rows.append(f"{'Avg':6s} {'Average of 12':28s} {round_display(avg):.2f}")
        return "\n".join(rows)
