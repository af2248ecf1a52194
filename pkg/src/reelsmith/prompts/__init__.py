"""Versioned prompt templates, loaded from text files packaged with the code."""

from __future__ import annotations

import json
from importlib import resources
from typing import Any


def load_template(relpath: str) -> str:
    """Read a template like 'structuring/synopsis.txt' from the package."""
    parts = relpath.split("/")
    node = resources.files(__package__)
    for part in parts:
        node = node / part
    return node.read_text(encoding="utf-8")


def build_messages(template: str, payload: Any) -> list[dict[str, str]]:
    """Standard two-message envelope: instructions plus a JSON payload."""
    return [
        {"role": "system", "content": template},
        {"role": "user", "content": json.dumps(payload, sort_keys=True, ensure_ascii=False)},
    ]
