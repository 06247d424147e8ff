"""Mine repetitive intro/ad segments across episodes and augment datasets.

Sentences (of at least three normalized tokens) that also occur verbatim
in another episode are flagged, nearby flagged indices are merged into
runs, short runs are discarded as outliers, and the surviving runs feed
an augmentation step that swaps or prepends repetitive blocks to create
new training samples with remapped labels.
"""

from __future__ import annotations

import hashlib
import json
import re
import warnings
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from random import Random

from .datastore import Annotation, CorpusRecord
from .segmenter import Sentence, SentenceDoc

DEFAULT_GAP_TOLERANCE = 2
DEFAULT_MIN_RUN_LEN = 2
DEFAULT_MIN_TOKENS = 3

_STRIP_RE = re.compile(r"[^a-z0-9\s]+")


class DedupError(ValueError):
    """Base class for mining/augmentation failures."""


class EmptyLibraryError(DedupError):
    """No repetitive segments are available to augment with."""


class AugmentationWarning(UserWarning):
    """The replacement path was skipped for an episode."""


@dataclass(frozen=True)
class RepetitiveRun:
    """A contiguous block of sentences that repeats across episodes."""

    episode_id: str
    first: int
    last: int
    texts: tuple[str, ...]
    durations_ms: tuple[int, ...]

    @property
    def index_run(self) -> tuple[int, int]:
        return (self.first, self.last)

    @property
    def normalized_texts(self) -> list[str]:
        return [normalize_sentence(t) for t in self.texts]

    def __len__(self) -> int:
        return self.last - self.first + 1


class SegmentLibrary:
    """Repetitive runs mined from a corpus, ordered by (episode_id, first)."""

    def __init__(self, runs: list[RepetitiveRun]):
        self.runs = sorted(runs, key=lambda r: (r.episode_id, r.first))

    def __len__(self) -> int:
        return len(self.runs)

    def for_episode(self, episode_id: str) -> list[RepetitiveRun]:
        return [r for r in self.runs if r.episode_id == episode_id]

    def other_than(self, episode_id: str) -> list[RepetitiveRun]:
        return [r for r in self.runs if r.episode_id != episode_id]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for run in self.runs:
                fh.write(
                    json.dumps(
                        {
                            "episode_id": run.episode_id,
                            "first": run.first,
                            "last": run.last,
                            "texts": list(run.texts),
                            "durations_s": [d / 1000.0 for d in run.durations_ms],
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )

    @classmethod
    def load(cls, path: str | Path) -> "SegmentLibrary":
        runs = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                data = json.loads(line)
                runs.append(
                    RepetitiveRun(
                        episode_id=data["episode_id"],
                        first=int(data["first"]),
                        last=int(data["last"]),
                        texts=tuple(data["texts"]),
                        durations_ms=tuple(
                            int(round(d * 1000)) for d in data["durations_s"]
                        ),
                    )
                )
        return cls(runs)


def normalize_sentence(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    return " ".join(_STRIP_RE.sub("", text.lower()).split())


def find_repetitive_indices(
    corpus: list[SentenceDoc],
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> dict[str, list[int]]:
    """Indices of sentences whose normalized text also occurs in another
    episode. Sentences under ``min_tokens`` normalized tokens are ignored
    so generic short lines cannot cross-match."""
    if len(corpus) < 2:
        raise DedupError("repetitive-content mining needs at least 2 episodes")
    owners: dict[str, set[str]] = defaultdict(set)
    for doc in corpus:
        for sentence in doc.sentences:
            normalized = normalize_sentence(sentence.text)
            if len(normalized.split()) >= min_tokens:
                owners[normalized].add(doc.episode_id)

    result: dict[str, list[int]] = {}
    for doc in corpus:
        hits = []
        for i, sentence in enumerate(doc.sentences):
            normalized = normalize_sentence(sentence.text)
            if len(normalized.split()) < min_tokens:
                continue
            if owners[normalized] - {doc.episode_id}:
                hits.append(i)
        if hits:
            result[doc.episode_id] = hits
    return result


def merge_and_clean(
    indices: list[int],
    gap_tolerance: int = DEFAULT_GAP_TOLERANCE,
    min_run_len: int = DEFAULT_MIN_RUN_LEN,
) -> list[tuple[int, int]]:
    """Merge nearby indices into inclusive runs and drop outliers.

    Indices whose difference is at most ``gap_tolerance + 1`` land in one
    run (so [0..4] joins [6, 7] across the missing 5); runs spanning fewer
    than ``min_run_len`` sentences are removed.
    """
    runs: list[tuple[int, int]] = []
    for index in indices:
        if runs and index - runs[-1][1] <= gap_tolerance + 1:
            runs[-1] = (runs[-1][0], index)
        else:
            runs.append((index, index))
    return [(a, b) for a, b in runs if b - a + 1 >= min_run_len]


def build_segment_library(
    corpus: list[SentenceDoc],
    gap_tolerance: int = DEFAULT_GAP_TOLERANCE,
    min_run_len: int = DEFAULT_MIN_RUN_LEN,
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> SegmentLibrary:
    """Mine repetitive runs from a corpus and store them for augmentation."""
    flagged = find_repetitive_indices(corpus, min_tokens=min_tokens)
    runs = []
    for doc in corpus:
        for first, last in merge_and_clean(
            flagged.get(doc.episode_id, []), gap_tolerance, min_run_len
        ):
            block = doc.sentences[first : last + 1]
            runs.append(
                RepetitiveRun(
                    episode_id=doc.episode_id,
                    first=first,
                    last=last,
                    texts=tuple(s.text for s in block),
                    durations_ms=tuple(s.duration_ms for s in block),
                )
            )
    return SegmentLibrary(runs)


def _lay_out(
    texts: tuple[str, ...], durations_ms: tuple[int, ...], start_ms: int
) -> list[Sentence]:
    """Sentences laid back to back from ``start_ms``, preserving durations."""
    cursor = start_ms
    laid = []
    for text, duration in zip(texts, durations_ms):
        laid.append(Sentence(index=-1, text=text, start_ms=cursor, end_ms=cursor + duration))
        cursor += duration
    return laid


def _reindexed(sentences: list[Sentence]) -> list[Sentence]:
    return [
        Sentence(i, s.text, s.start_ms, s.end_ms, token_range=None)
        for i, s in enumerate(sentences)
    ]


def augment_episode(
    doc: SentenceDoc,
    annotation: Annotation | None,
    library: SegmentLibrary,
    rng_seed: int,
) -> tuple[SentenceDoc, Annotation | None]:
    """One augmented variant of an episode.

    If the episode contains a repetitive run, its earliest run is replaced
    by a randomly drawn segment from another episode; otherwise the segment
    is prepended. Annotation indices are remapped by the net shift, so the
    selected sentence texts are unchanged. If the annotation overlaps the
    run that would be replaced, the episode falls back to prepending, with
    a warning.
    """
    candidates = library.other_than(doc.episode_id)
    if not candidates:
        raise EmptyLibraryError(
            f"no repetitive segments from other episodes to inject into "
            f"{doc.episode_id!r}"
        )
    rng = Random(rng_seed)
    segment = candidates[rng.randrange(len(candidates))]
    ann_indices = annotation.selected_indices if annotation is not None else []

    own_runs = library.for_episode(doc.episode_id)
    replace_run = own_runs[0] if own_runs else None
    if replace_run is not None and any(
        replace_run.first <= i <= replace_run.last for i in ann_indices
    ):
        warnings.warn(
            f"episode {doc.episode_id!r}: annotation overlaps the repetitive "
            f"run {replace_run.index_run}; prepending instead of replacing",
            AugmentationWarning,
        )
        replace_run = None

    if replace_run is not None:
        first, last = replace_run.index_run
        anchor = doc.sentences[first].start_ms
        injected = _lay_out(segment.texts, segment.durations_ms, anchor)
        sentences = doc.sentences[:first] + injected + doc.sentences[last + 1 :]
        shift = len(segment) - len(replace_run)
        remapped = [i if i < first else i + shift for i in ann_indices]
        duration_ms = max(doc.duration_ms, sentences[-1].end_ms if sentences else 0)
    else:
        injected = _lay_out(segment.texts, segment.durations_ms, 0)
        offset = injected[-1].end_ms if injected else 0
        shifted = [
            Sentence(-1, s.text, s.start_ms + offset, s.end_ms + offset)
            for s in doc.sentences
        ]
        sentences = injected + shifted
        remapped = [i + len(segment) for i in ann_indices]
        duration_ms = doc.duration_ms + offset

    new_doc = SentenceDoc(
        episode_id=doc.episode_id,
        sentences=_reindexed(sentences),
        audio_ref=doc.audio_ref,
        duration_ms=duration_ms,
    )
    if annotation is None:
        return new_doc, None
    new_annotation = Annotation(
        episode_id=doc.episode_id,
        selected_indices=remapped,
        annotator_id=annotation.annotator_id,
        created_at=annotation.created_at,
        summary_duration_s=annotation.summary_duration_s,
        revision=annotation.revision,
    )
    return new_doc, new_annotation


def _child_seed(seed: int, episode_id: str, variant: int) -> int:
    key = f"{seed}:{episode_id}:{variant}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def build_augmented_dataset(
    records: list[CorpusRecord],
    factor: int = 20,
    seed: int = 0,
    workers: int = 1,
) -> list[CorpusRecord]:
    """Originals plus ``factor`` augmented variants per episode.

    Output size is exactly ``len(records) * (factor + 1)`` and the result is
    deterministic under ``seed`` regardless of ``workers``. Variants get
    derived episode_ids and carry provenance back to their source.
    """
    if factor < 0:
        raise ValueError("factor must be non-negative")
    out = list(records)
    if factor == 0:
        return out
    library = build_segment_library([r.doc for r in records])

    def _variants(record: CorpusRecord) -> list[CorpusRecord]:
        produced = []
        for variant in range(factor):
            child = _child_seed(seed, record.episode_id, variant)
            new_doc, new_annotation = augment_episode(
                record.doc, record.annotation, library, child
            )
            new_id = f"{record.episode_id}+aug{variant:03d}"
            new_doc.episode_id = new_id
            if new_annotation is not None:
                new_annotation.episode_id = new_id
            produced.append(
                CorpusRecord(
                    doc=new_doc,
                    series_id=record.series_id,
                    title=record.title,
                    description=record.description,
                    annotation=new_annotation,
                    provenance=f"augmented-from:{record.episode_id}:seed={child}",
                )
            )
        return produced

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for produced in pool.map(_variants, records):
                out.extend(produced)
    else:
        for record in records:
            out.extend(_variants(record))
    return out
