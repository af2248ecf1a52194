"""Retrieval-backed camera planning: corpus indexing, top-k search, joint shot re-planning.

The index is an exact flat scan over unit-norm embeddings; cosine similarity
with ties broken by ascending clip id, so results are reproducible and
checkable against a brute-force oracle.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .model import SceneBlock, ShotType
from .prompts import build_messages, load_template
from .providers.base import MalformedOutput

REPLAN_SCHEMA = {
    "type": "object",
    "properties": {
        "shots": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string"},
                    "content_prompt": {"type": "string", "minLength": 1},
                    "shot_type": {"type": "string", "enum": [t.value for t in ShotType if t is not ShotType.UNSPECIFIED]},
                    "camera_movement": {"type": "string", "minLength": 1},
                    "camera_angle": {"type": "string", "minLength": 1},
                    "atmosphere": {"type": "string", "minLength": 1},
                },
                "required": ["id", "content_prompt", "shot_type", "camera_movement", "camera_angle", "atmosphere"],
            },
        }
    },
    "required": ["shots"],
}


@dataclass
class CorpusEntry:
    clip_id: str
    description: str
    embedding: np.ndarray


@dataclass
class VectorIndex:
    dimension: int
    entries: list[CorpusEntry]
    metadata: dict[str, Any] = field(default_factory=dict)

    def matrix(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, self.dimension))
        return np.stack([e.embedding for e in self.entries])


@dataclass
class RetrievalResult:
    query: str
    hits: list[tuple[str, float]]

    def clip_ids(self) -> list[str]:
        return [clip_id for clip_id, _ in self.hits]


def corpus_hash(corpus: Sequence[tuple[str, str]]) -> str:
    h = hashlib.sha256()
    for clip_id, description in corpus:
        h.update(clip_id.encode("utf-8"))
        h.update(b"\x1f")
        h.update(description.encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()


def build_index(
    corpus: Sequence[tuple[str, str]],
    embedder: Any,
    model_name: str = "mock",
    batch_size: int = 64,
) -> VectorIndex:
    """Embed every (clip_id, description) pair into a flat index."""
    if not corpus:
        raise ValueError("corpus must be non-empty")
    seen: set[str] = set()
    for clip_id, description in corpus:
        if clip_id in seen:
            raise ValueError(f"duplicate clip_id {clip_id!r}")
        if not description:
            raise ValueError(f"empty description for clip_id {clip_id!r}")
        seen.add(clip_id)
    vectors: list[np.ndarray] = []
    descriptions = [d for _, d in corpus]
    for start in range(0, len(descriptions), batch_size):
        batch = descriptions[start : start + batch_size]
        vectors.extend(np.asarray(embedder.embed(batch), dtype=np.float64))
    entries = [
        CorpusEntry(clip_id=cid, description=desc, embedding=vec)
        for (cid, desc), vec in zip(corpus, vectors)
    ]
    return VectorIndex(
        dimension=int(entries[0].embedding.shape[0]),
        entries=entries,
        metadata={"embedding_model": model_name, "corpus_hash": corpus_hash(corpus)},
    )


def serialize_query(block: SceneBlock) -> str:
    """Deterministic retrieval query text with a fixed field order."""
    lines = [
        f"location: {block.location}",
        f"time_of_day: {block.time_of_day}",
        f"characters: {', '.join(block.characters)}",
        f"visual_elements: {', '.join(block.visual_elements)}",
        f"narrative_objective: {block.narrative_objective}",
    ]
    for i, shot in enumerate(block.shot_prompts):
        lines.append(f"shot[{i}]: {shot.content_prompt}")
    return "\n".join(lines)


def retrieve(index: VectorIndex, query: str, embedder: Any, k: int) -> RetrievalResult:
    """Exact top-k by cosine similarity; ties broken by ascending clip_id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not index.entries:
        raise ValueError("index is empty")
    qv = np.asarray(embedder.embed([query]), dtype=np.float64)[0]
    qv = qv / np.linalg.norm(qv)
    scores = index.matrix() @ qv
    order = sorted(range(len(index.entries)), key=lambda i: (-scores[i], index.entries[i].clip_id))
    top = order[: min(k, len(order))]
    hits = [(index.entries[i].clip_id, float(np.clip(scores[i], -1.0, 1.0))) for i in top]
    return RetrievalResult(query=query, hits=hits)


def _block_payload(block: SceneBlock, references: RetrievalResult, index: Optional[VectorIndex]) -> dict[str, Any]:
    descriptions = {}
    if index is not None:
        descriptions = {e.clip_id: e.description for e in index.entries}
    return {
        "block": {
            "id": block.id,
            "location": block.location,
            "time_of_day": block.time_of_day,
            "characters": block.characters,
            "visual_elements": block.visual_elements,
            "narrative_objective": block.narrative_objective,
            "shots": [
                {"id": s.id, "content_prompt": s.content_prompt} for s in block.shot_prompts
            ],
        },
        "references": [
            {"clip_id": cid, "similarity": score, "description": descriptions.get(cid, "")}
            for cid, score in references.hits
        ],
    }


def replan_shots(
    block: SceneBlock,
    references: RetrievalResult,
    chat: Any,
    rounds: int = 1,
    index: Optional[VectorIndex] = None,
) -> SceneBlock:
    """Re-plan all shots of a block jointly against the retrieved references.

    Runs `rounds` provider turns over one growing dialogue; every turn must
    return the same shot ids in order with full camera vocabulary filled in.
    """
    if not references.hits:
        raise ValueError("references must be non-empty")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    template = load_template("camera/replan.txt")
    messages = build_messages(template, _block_payload(block, references, index))
    result: Optional[dict[str, Any]] = None
    for turn in range(rounds):
        result = chat.chat_complete(messages, schema=REPLAN_SCHEMA)
        if turn + 1 < rounds:
            messages = messages + [
                {"role": "assistant", "content": json.dumps(result, sort_keys=True)},
                {
                    "role": "user",
                    "content": "Refine the plan once more for stronger cross-shot consistency; same JSON shape.",
                },
            ]
    assert result is not None
    wanted = [s.id for s in block.shot_prompts]
    got = [s.get("id") for s in result["shots"]]
    if got != wanted:
        raise MalformedOutput(f"re-planned shot ids {got} do not match block shots {wanted}")
    new_shots = []
    for spec, planned in zip(block.shot_prompts, result["shots"]):
        new_shots.append(
            replace(
                spec,
                content_prompt=planned["content_prompt"],
                shot_type=ShotType(planned["shot_type"]),
                camera_movement=planned["camera_movement"],
                camera_angle=planned["camera_angle"],
                atmosphere=planned["atmosphere"],
            )
        )
    return replace(block, shot_prompts=new_shots)


# -- persistence ---------------------------------------------------------------


def _encode_vector(vec: np.ndarray) -> str:
    return base64.b64encode(vec.astype("<f4").tobytes()).decode("ascii")


def _decode_vector(data: str, dimension: int) -> np.ndarray:
    vec = np.frombuffer(base64.b64decode(data), dtype="<f4").astype(np.float64)
    if vec.shape[0] != dimension:
        raise ValueError(f"vector length {vec.shape[0]} != index dimension {dimension}")
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def save_index(index: VectorIndex, path: Path) -> None:
    doc = {
        "dimension": index.dimension,
        "metadata": index.metadata,
        "entries": [
            {
                "clip_id": e.clip_id,
                "description": e.description,
                "embedding_b64": _encode_vector(e.embedding),
            }
            for e in index.entries
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, ensure_ascii=False), encoding="utf-8")


def load_index(path: Path) -> VectorIndex:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    dimension = doc["dimension"]
    entries = [
        CorpusEntry(
            clip_id=row["clip_id"],
            description=row["description"],
            embedding=_decode_vector(row["embedding_b64"], dimension),
        )
        for row in doc["entries"]
    ]
    return VectorIndex(dimension=dimension, entries=entries, metadata=doc.get("metadata", {}))


def read_corpus_jsonl(path: Path) -> list[tuple[str, str]]:
    """Corpus ingestion format: one {"clip_id", "description"} object per line."""
    corpus: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            row = json.loads(line)
            try:
                corpus.append((row["clip_id"], row["description"]))
            except KeyError as err:
                raise ValueError(f"{path}:{lineno}: missing field {err}") from err
    return corpus
