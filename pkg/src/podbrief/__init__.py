"""podbrief - turn word-level podcast transcripts into audio summaries.

The pipeline: parse an ASR result document, split it into timestamped
sentences (punctuation plus a pause rule), score and pick the top-k
sentences, and stitch the matching audio spans into a short summary clip.
Around that core live a dataset store with a synthetic fixture generator,
repetitive-segment mining and augmentation, a ROUGE + cross-validation
harness, a CLI, and an HTTP annotation backend.

CLI usage:
    $ podbrief fixtures --out corpus.jsonl --n-series 2 --seed 7
    $ podbrief crossval corpus.jsonl --k-folds 5 --seed 7 --out report.json
"""

from __future__ import annotations

from .audio import AudioClip, Span, read_audio, spans_of, stitch, write_audio
from .datastore import (
    Annotation,
    CorpusRecord,
    generate_fixture_corpus,
    labels_from_annotation,
    load_corpus,
    make_annotation,
    save_corpus,
)
from .dedup import (
    SegmentLibrary,
    augment_episode,
    build_augmented_dataset,
    build_segment_library,
    find_repetitive_indices,
    merge_and_clean,
    normalize_sentence,
)
from .evaluation import (
    CrossValReport,
    RougeReport,
    RougeScore,
    aggregate,
    evaluate,
    kfold_split,
    rouge_l,
    rouge_n,
    rouge_tokenize,
    selection_text,
)
from .segmenter import Sentence, SentenceDoc, segment
from .summarizer import (
    Selection,
    SentenceScores,
    external_scorer,
    lead_n,
    reference_scorer,
    select_top_k,
    truncate_tokens,
)
from .transcript import Transcript, WordToken, fetch_transcription, parse_transcript

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "Span",
    "read_audio",
    "spans_of",
    "stitch",
    "write_audio",
    "Annotation",
    "CorpusRecord",
    "generate_fixture_corpus",
    "labels_from_annotation",
    "load_corpus",
    "make_annotation",
    "save_corpus",
    "SegmentLibrary",
    "augment_episode",
    "build_augmented_dataset",
    "build_segment_library",
    "find_repetitive_indices",
    "merge_and_clean",
    "normalize_sentence",
    "CrossValReport",
    "RougeReport",
    "RougeScore",
    "aggregate",
    "evaluate",
    "kfold_split",
    "rouge_l",
    "rouge_n",
    "rouge_tokenize",
    "selection_text",
    "Sentence",
    "SentenceDoc",
    "segment",
    "Selection",
    "SentenceScores",
    "external_scorer",
    "lead_n",
    "reference_scorer",
    "select_top_k",
    "truncate_tokens",
    "Transcript",
    "WordToken",
    "fetch_transcription",
    "parse_transcript",
    "__version__",
]
