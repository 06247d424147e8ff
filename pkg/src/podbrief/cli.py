"""Command-line entry point wiring the pipeline end to end.

Commands: ingest, segment, summarize, stitch, mine-repeats, augment,
evaluate, crossval, fixtures, serve-annotation. Options can come from a
``key = value`` config file; flags override the file. Outputs are
deterministic for a given seed. Exit codes: 0 success, 2 bad input,
3 processing failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

from . import audio as audio_mod
from . import datastore, dedup, evaluation, segmenter, summarizer, transcript

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROCESSING = 3

ASR_TOKEN_ENV = "PODBRIEF_ASR_TOKEN"


class InputError(ValueError):
    """Bad command input: missing/malformed files or incoherent options."""


@dataclass
class PipelineConfig:
    pause_threshold_s: float = 2.0
    top_k: int = 12
    max_tokens: int = 512
    scorer: str = "reference"
    scorer_endpoint: str = ""
    augmentation_factor: int = 20
    k_folds: int = 5
    seed: int = 0
    workers: int = 1

    def validate(self) -> None:
        if self.pause_threshold_s <= 0:
            raise InputError("pause_threshold_s must be positive")
        if self.top_k < 1 or self.max_tokens < 1 or self.workers < 1:
            raise InputError("top_k, max_tokens and workers must be at least 1")
        if self.k_folds < 2:
            raise InputError("k_folds must be at least 2")
        if self.augmentation_factor < 0:
            raise InputError("augmentation factor must be non-negative")
        if self.scorer not in ("lead", "reference", "external"):
            raise InputError(f"unknown scorer {self.scorer!r}")
        if self.scorer == "external" and not self.scorer_endpoint:
            raise InputError("--scorer external needs --scorer-endpoint")


def parse_config_file(path: str | Path) -> dict:
    """Read ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    config = PipelineConfig()
    file_values = parse_config_file(args.config) if getattr(args, "config", None) else {}
    known = {f.name for f in fields(PipelineConfig)}
    for key, raw in file_values.items():
        if key not in known:
            raise InputError(f"unknown config key {key!r}")
        current = getattr(config, key)
        try:
            setattr(config, key, type(current)(raw))
        except ValueError:
            raise InputError(f"config key {key!r}: bad value {raw!r}") from None
    flag_map = {
        "pause_threshold": "pause_threshold_s",
        "k": "top_k",
        "max_tokens": "max_tokens",
        "scorer": "scorer",
        "scorer_endpoint": "scorer_endpoint",
        "factor": "augmentation_factor",
        "k_folds": "k_folds",
        "seed": "seed",
        "workers": "workers",
    }
    for flag, attr in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(config, attr, value)
    config.validate()
    return config


def _write_json(data: dict, path: str | Path | None) -> None:
    text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_selection(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text())
    if "episode_id" not in data or "indices" not in data:
        raise InputError(f"{path}: not a selection file")
    return data


def _score_doc(
    doc: segmenter.SentenceDoc,
    config: PipelineConfig,
    runs: list[tuple[int, int]] | None = None,
) -> summarizer.Selection:
    """Truncate to the token budget, score with the configured scorer, and
    pick the top-k."""
    truncated = summarizer.truncate_tokens(doc, config.max_tokens)
    if config.scorer == "lead":
        return summarizer.lead_n(truncated, config.top_k)
    if config.scorer == "reference":
        scores = summarizer.reference_scorer(truncated, repetitive_runs=runs)
    else:
        scores = summarizer.external_scorer(config.scorer_endpoint, truncated)
    return summarizer.select_top_k(scores, config.top_k)


def _emit_audio(doc, selection, audio_path, out_path, crossfade_ms=0):
    clip = audio_mod.read_audio(audio_path)
    spans = audio_mod.spans_of(doc, selection)
    audio_mod.write_audio(audio_mod.stitch(clip, spans, crossfade_ms=crossfade_ms), out_path)


def cmd_ingest(args) -> int:
    if args.service:
        credentials = os.environ.get(ASR_TOKEN_ENV)
        raw = transcript.fetch_transcription(args.service, args.audio_ref, credentials)
    elif args.raw:
        raw = Path(args.raw).read_bytes()
    else:
        raise InputError("provide a raw ASR document or --service")
    parsed = transcript.parse_transcript(
        raw, args.episode_id, args.audio_ref or "", duration_s=args.duration
    )
    out = args.out or f"{args.episode_id}.transcript.json"
    _write_json(transcript.transcript_to_dict(parsed), out)
    return EXIT_OK


def cmd_segment(args) -> int:
    config = build_config(args)
    data = json.loads(Path(args.transcript).read_text())
    parsed = transcript.transcript_from_dict(data)
    doc = segmenter.segment(parsed, pause_threshold_s=config.pause_threshold_s)
    out = args.out or f"{doc.episode_id}.sentences.jsonl"
    segmenter.save_sentence_doc(doc, out)
    return EXIT_OK


def cmd_summarize(args) -> int:
    config = build_config(args)
    doc = segmenter.load_sentence_doc(args.doc)
    runs = None
    if args.repeats:
        library = dedup.SegmentLibrary.load(args.repeats)
        runs = [r.index_run for r in library.for_episode(doc.episode_id)]
    selection = _score_doc(doc, config, runs)
    out = args.out or f"{doc.episode_id}.selection.json"
    _write_json(
        {
            "episode_id": selection.episode_id,
            "indices": selection.indices,
            "k_requested": selection.k_requested,
            "text": evaluation.selection_text(doc, selection.indices),
        },
        out,
    )
    if args.emit_audio:
        audio_path = args.audio or doc.audio_ref
        if not audio_path:
            raise InputError("--emit-audio needs --audio or an audio_ref in the doc")
        audio_out = args.audio_out or f"{doc.episode_id}.summary.wav"
        _emit_audio(doc, selection, audio_path, audio_out, args.crossfade_ms)
    return EXIT_OK


def cmd_stitch(args) -> int:
    doc = segmenter.load_sentence_doc(args.doc)
    data = _load_selection(args.selection)
    selection = summarizer.Selection(
        data["episode_id"], [int(i) for i in data["indices"]], data.get("k_requested", 0)
    )
    audio_path = args.audio or doc.audio_ref
    if not audio_path:
        raise InputError("no audio source: pass --audio or set audio_ref")
    out = args.out or f"{doc.episode_id}.summary.wav"
    _emit_audio(doc, selection, audio_path, out, args.crossfade_ms)
    return EXIT_OK


def cmd_mine_repeats(args) -> int:
    records = datastore.load_corpus(args.corpus)
    library = dedup.build_segment_library(
        [r.doc for r in records],
        gap_tolerance=args.gap_tolerance,
        min_run_len=args.min_run_len,
        min_tokens=args.min_tokens,
    )
    library.save(args.out or "repeats.jsonl")
    print(f"mined {len(library)} repetitive segments from {len(records)} episodes")
    return EXIT_OK


def cmd_augment(args) -> int:
    config = build_config(args)
    records = datastore.load_corpus(args.corpus)
    augmented = dedup.build_augmented_dataset(
        records,
        factor=config.augmentation_factor,
        seed=config.seed,
        workers=config.workers,
    )
    datastore.save_corpus(augmented, args.out or "augmented.jsonl")
    print(f"{len(records)} episodes -> {len(augmented)} records")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    predictions = _read_summary_lines(args.predictions)
    references = _read_summary_lines(args.references)
    missing = sorted(set(references) - set(predictions))
    if missing:
        raise InputError(f"predictions missing for episodes: {', '.join(missing)}")
    per_episode = {}
    for episode_id in sorted(references):
        if episode_id not in predictions:
            continue
        report = evaluation.rouge_all(predictions[episode_id], references[episode_id])
        per_episode[episode_id] = evaluation.rouge_report_to_dict(report)
    mean = evaluation.mean_report(
        [
            evaluation.rouge_all(predictions[e], references[e])
            for e in sorted(references)
        ]
    )
    _write_json(
        {"per_episode": per_episode, "mean": evaluation.rouge_report_to_dict(mean)},
        args.out,
    )
    return EXIT_OK


def _read_summary_lines(path: str | Path) -> dict[str, str]:
    """JSONL of {episode_id, text} (a selection file with text also works)."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        data = json.loads(line)
        if "episode_id" not in data or "text" not in data:
            raise InputError(f"{path}:{lineno}: need episode_id and text fields")
        if data["episode_id"] in out:
            raise InputError(f"{path}:{lineno}: duplicate episode {data['episode_id']!r}")
        out[data["episode_id"]] = data["text"]
    return out


def cmd_crossval(args) -> int:
    config = build_config(args)
    records = [r for r in datastore.load_corpus(args.corpus) if r.annotation is not None]
    if not records:
        raise InputError(f"{args.corpus}: no annotated episodes")
    by_id = {r.episode_id: r for r in records}

    runs_by_episode: dict[str, list[tuple[int, int]]] = {}
    if config.scorer == "reference" and len(records) >= 2:
        library = dedup.build_segment_library([r.doc for r in records])
        for run in library.runs:
            runs_by_episode.setdefault(run.episode_id, []).append(run.index_run)

    def predict(episode_id: str) -> summarizer.Selection:
        record = by_id[episode_id]
        return _score_doc(record.doc, config, runs_by_episode.get(episode_id))

    folds = evaluation.kfold_split(sorted(by_id), k=config.k_folds, seed=config.seed)
    ordered_ids = sorted(by_id)
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        selections = dict(zip(ordered_ids, pool.map(predict, ordered_ids)))

    per_fold = []
    for _, test_ids in folds:
        fold_reports = [
            evaluation.evaluate(by_id[e].doc, selections[e], by_id[e].annotation)
            for e in test_ids
        ]
        per_fold.append(evaluation.mean_report(fold_reports))
    report = evaluation.aggregate(per_fold)

    body = {
        "config": {
            "scorer": config.scorer,
            "top_k": config.top_k,
            "max_tokens": config.max_tokens,
            "k_folds": config.k_folds,
            "seed": config.seed,
        },
        "fold_test_ids": [test for _, test in folds],
        "report": evaluation.crossval_report_to_dict(report),
    }
    _write_json(body, args.out)
    if args.out:
        system = f"{config.scorer} (k={config.top_k})"
        print(evaluation.format_results_table({system: report}))
    if args.histogram:
        evaluation.write_histogram_csv(
            evaluation.selection_histogram(list(selections.values())), args.histogram
        )
    return EXIT_OK


def cmd_fixtures(args) -> int:
    records = datastore.generate_fixture_corpus(
        n_series=args.n_series,
        episodes_per_series_mean=args.episodes_mean,
        selected_mean=args.selected_mean,
        seed=args.seed if args.seed is not None else 0,
        audio_dir=args.audio_dir,
        episodes_per_series_std=args.episodes_std,
        selected_std=args.selected_std,
    )
    datastore.save_corpus(records, args.out)
    print(f"wrote {len(records)} fixture episodes to {args.out}")
    return EXIT_OK


def cmd_serve_annotation(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.corpus, preview_ttl_s=args.ttl, audio_base=args.audio_base)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="podbrief",
        description="Podcast transcript-to-audio-summary toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, config=True, seed=False, workers=False):
        if config:
            p.add_argument("--config", help="key = value config file")
        if seed:
            p.add_argument("--seed", type=int, default=None)
        if workers:
            p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("ingest", help="parse (or fetch) an ASR result document")
    p.add_argument("raw", nargs="?", help="ASR result JSON file")
    p.add_argument("--service", help="transcription service endpoint")
    p.add_argument("--episode-id", required=True)
    p.add_argument("--audio-ref", default="")
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("segment", help="split a transcript into sentences")
    p.add_argument("transcript")
    p.add_argument("--pause-threshold", type=float, default=None, dest="pause_threshold")
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("summarize", help="score sentences and select the top k")
    p.add_argument("doc", help="sentence doc (JSON lines)")
    p.add_argument("--scorer", choices=["lead", "reference", "external"], default=None)
    p.add_argument("--scorer-endpoint", default=None, dest="scorer_endpoint")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--max-tokens", type=int, default=None, dest="max_tokens")
    p.add_argument("--repeats", help="segment library for repetitive-run zeroing")
    p.add_argument("--emit-audio", action="store_true")
    p.add_argument("--audio", help="source WAV (defaults to the doc's audio_ref)")
    p.add_argument("--audio-out")
    p.add_argument("--crossfade-ms", type=int, default=0)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("stitch", help="stitch the audio for a selection")
    p.add_argument("doc")
    p.add_argument("selection")
    p.add_argument("--audio")
    p.add_argument("--crossfade-ms", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("mine-repeats", help="mine repetitive segments from a corpus")
    p.add_argument("corpus")
    p.add_argument("--gap-tolerance", type=int, default=dedup.DEFAULT_GAP_TOLERANCE)
    p.add_argument("--min-run-len", type=int, default=dedup.DEFAULT_MIN_RUN_LEN)
    p.add_argument("--min-tokens", type=int, default=dedup.DEFAULT_MIN_TOKENS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mine_repeats)

    p = sub.add_parser("augment", help="build an augmented dataset")
    p.add_argument("corpus")
    p.add_argument("--factor", type=int, default=None)
    p.add_argument("--out")
    common(p, seed=True, workers=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("evaluate", help="ROUGE of predictions vs references")
    p.add_argument("predictions", help="JSONL of {episode_id, text}")
    p.add_argument("references", help="JSONL of {episode_id, text}")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("crossval", help="k-fold cross-validation of a scorer")
    p.add_argument("corpus")
    p.add_argument("--k-folds", type=int, default=None, dest="k_folds")
    p.add_argument("--scorer", choices=["lead", "reference", "external"], default=None)
    p.add_argument("--scorer-endpoint", default=None, dest="scorer_endpoint")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--max-tokens", type=int, default=None, dest="max_tokens")
    p.add_argument("--histogram", help="write selected-index distribution CSV here")
    p.add_argument("--out")
    common(p, seed=True, workers=True)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("fixtures", help="generate a synthetic fixture corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n-series", type=int, default=19)
    p.add_argument("--episodes-mean", type=float, default=16.3)
    p.add_argument("--episodes-std", type=float, default=6.28)
    p.add_argument("--selected-mean", type=float, default=14.57)
    p.add_argument("--selected-std", type=float, default=7.01)
    p.add_argument("--audio-dir")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("serve-annotation", help="run the annotation HTTP service")
    p.add_argument("corpus")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--ttl", type=float, default=300.0)
    p.add_argument("--audio-base", help="base directory for relative audio refs")
    p.set_defaults(func=cmd_serve_annotation)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        InputError,
        FileNotFoundError,
        IsADirectoryError,
        json.JSONDecodeError,
        transcript.TranscriptError,
        datastore.DatastoreError,
        dedup.DedupError,
        segmenter.EmptyDocumentError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - one clean boundary for exit codes
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING


if __name__ == "__main__":
    sys.exit(main())
