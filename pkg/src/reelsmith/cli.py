"""Command-line entry point: project init, staged runs, indexing, export, eval, correlate.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import camera_rag
from .config import RunConfig, load_config, save_config
from .scoring import correlate as correlate_fn
from .scoring import judge_film, load_rubrics
from .scoring.stats import UndefinedCorrelation
from .model import ProjectInput, ProjectState, Reference, validate_project
from .persist import CONFIG_FILE, ProjectStore
from .pipeline import STAGES, run_pipeline
from .providers.base import ProviderError
from .providers.mock import MockMediaReview
from .sound.library import build_audio_library, read_audio_library_jsonl, save_audio_library
from .timeline_io import save_otio

log = logging.getLogger(__name__)


def _parse_named_ref(value: str) -> Reference:
    if "=" not in value:
        raise argparse.ArgumentTypeError(f"expected name=image_path, got {value!r}")
    name, path = value.split("=", 1)
    return Reference(name=name, image_path=path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reelsmith",
        description="Turn a theme and reference images into an editable multi-track film timeline.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_init = sub.add_parser("init", help="create a project directory")
    p_init.add_argument("dir", type=Path)
    p_init.add_argument("--theme", type=Path, required=True, help="text file with the theme")
    p_init.add_argument("--char", type=_parse_named_ref, action="append", default=[], metavar="NAME=IMG")
    p_init.add_argument("--loc", type=_parse_named_ref, action="append", default=[], metavar="NAME=IMG")
    p_init.add_argument("--audience", help="target audience archetype")
    p_init.add_argument("--seed", type=int, default=0)

    p_run = sub.add_parser("run", help="run pipeline stages")
    p_run.add_argument("--project", type=Path, default=Path("."))
    p_run.add_argument("--from", dest="from_stage", choices=STAGES)
    p_run.add_argument("--to", dest="to_stage", choices=STAGES)
    p_run.add_argument("--offline", action="store_true", help="mock providers + transcripts only")

    p_index = sub.add_parser("index", help="build retrieval indexes")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)
    p_corpus = index_sub.add_parser("build-corpus", help="index a film-reference corpus (JSONL)")
    p_corpus.add_argument("jsonl", type=Path)
    p_corpus.add_argument("--project", type=Path, default=Path("."))
    p_audio = index_sub.add_parser("build-audio", help="index an audio-asset library (JSONL)")
    p_audio.add_argument("jsonl", type=Path)
    p_audio.add_argument("--project", type=Path, default=Path("."))

    p_export = sub.add_parser("export", help="export the current timeline")
    p_export.add_argument("--project", type=Path, default=Path("."))
    p_export.add_argument("--otio", type=Path, required=True)

    p_eval = sub.add_parser("eval", help="score a film against the 12-criterion rubric set")
    p_eval.add_argument("media", type=Path)
    p_eval.add_argument("--rubrics", type=Path, help="directory of rubric .txt files")
    p_eval.add_argument("--script", type=Path, help="original script shown to the judge")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--json", dest="as_json", action="store_true")

    p_corr = sub.add_parser("correlate", help="correlation coefficients between two rating files")
    p_corr.add_argument("auto_csv", type=Path)
    p_corr.add_argument("human_csv", type=Path)
    p_corr.add_argument("--json", dest="as_json", action="store_true")

    p_val = sub.add_parser("validate", help="check all project invariants")
    p_val.add_argument("--project", type=Path, default=Path("."))
    return parser


def _cmd_init(args: argparse.Namespace) -> int:
    theme = args.theme.read_text(encoding="utf-8").strip()
    project_input = ProjectInput(
        theme_text=theme,
        character_refs=list(args.char),
        location_refs=list(args.loc),
        target_audience=args.audience,
    )
    problems = validate_project(ProjectState(input=project_input))
    if problems:
        raise ValueError("; ".join(problems))
    for ref in list(args.char) + list(args.loc):
        if not Path(ref.image_path).exists():
            raise FileNotFoundError(f"reference image for {ref.name!r} not found: {ref.image_path}")
    store = ProjectStore(args.dir)
    store.initialize(project_input)
    save_config(RunConfig(seed=args.seed), store.root / CONFIG_FILE)
    print(f"initialized project at {store.root}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.project / CONFIG_FILE)
    state = run_pipeline(
        args.project,
        config,
        from_stage=args.from_stage,
        to_stage=args.to_stage,
        offline=args.offline,
    )
    print(f"completed stages through {state.stage_log[-1].stage}")
    return 0


def _cmd_index(args: argparse.Namespace) -> int:
    config = load_config(args.project / CONFIG_FILE)
    from .providers.mock import MockEmbedding

    embedder = MockEmbedding(seed=config.seed, dim=config.embedding_dim)
    if args.index_command == "build-corpus":
        corpus = camera_rag.read_corpus_jsonl(args.jsonl)
        index = camera_rag.build_index(corpus, embedder)
        out = args.project / "index" / "corpus.idx.json"
        camera_rag.save_index(index, out)
        print(f"indexed {len(index.entries)} corpus entries -> {out}")
    else:
        records = read_audio_library_jsonl(args.jsonl)
        library = build_audio_library(records, embedder)
        out = args.project / "index" / "audio.library.json"
        save_audio_library(library, out)
        print(f"indexed {len(library.assets)} audio assets -> {out}")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    store = ProjectStore(args.project)
    state = store.load_state(list(STAGES))
    if state.timeline is None:
        raise ValueError("no timeline to export; run the pipeline first")
    save_otio(state.timeline, args.otio, project_meta={"project": state.timeline.name}, media_root=store.root)
    print(f"wrote {args.otio}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    rubrics = load_rubrics(args.rubrics)
    script_text = args.script.read_text(encoding="utf-8") if args.script else None
    card = judge_film(str(args.media), rubrics, MockMediaReview(seed=args.seed), script_text=script_text)
    if args.as_json:
        print(json.dumps(card.as_dict(), indent=2, sort_keys=True))
    else:
        print(card.render_table())
    return 0


def _read_ratings(path: Path) -> list[float]:
    values: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row_num, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            cell = row[-1].strip()
            try:
                values.append(float(cell))
            except ValueError:
                if row_num == 0:
                    continue  # header
                raise ValueError(f"{path}: non-numeric rating {cell!r} on line {row_num + 1}")
    return values


def _cmd_correlate(args: argparse.Namespace) -> int:
    auto = _read_ratings(args.auto_csv)
    human = _read_ratings(args.human_csv)
    r, rho, tau = correlate_fn(auto, human)
    if args.as_json:
        print(json.dumps({"pearson_r": r, "spearman_rho": rho, "kendall_tau_b": tau}, indent=2, sort_keys=True))
    else:
        print(f"pearson_r      {r: .6f}")
        print(f"spearman_rho   {rho: .6f}")
        print(f"kendall_tau_b  {tau: .6f}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    store = ProjectStore(args.project)
    state = store.load_state(list(STAGES))
    problems = validate_project(state)
    if problems:
        for problem in problems:
            print(problem, file=sys.stderr)
        return 1
    print("project valid")
    return 0


_COMMANDS = {
    "init": _cmd_init,
    "run": _cmd_run,
    "index": _cmd_index,
    "export": _cmd_export,
    "eval": _cmd_eval,
    "correlate": _cmd_correlate,
    "validate": _cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return _COMMANDS[args.command](args)
    except (ProviderError, UndefinedCorrelation, ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def entrypoint() -> None:  # console script
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
