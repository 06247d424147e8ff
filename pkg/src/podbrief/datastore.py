"""Persist corpora and annotations; generate synthetic fixture corpora.

Storage is JSON lines keyed by episode_id: one header record carrying the
schema version, then one record per episode. Fixture corpora plant a
shared intro segment per series (so repetitive-content mining has ground
truth) and generate tone WAVs whose sample positions match the sentence
timestamps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from random import Random

import numpy as np

from . import audio as audio_mod
from .segmenter import Sentence, SentenceDoc, sentence_from_dict, sentence_to_dict

SCHEMA_NAME = "podbrief-corpus"
SCHEMA_VERSION = 1

MIN_SUMMARY_S = 30.0
MAX_SUMMARY_S = 120.0

FIXTURE_SAMPLE_RATE = 8000


class DatastoreError(ValueError):
    """Base class for corpus storage failures."""


class DuplicateEpisodeError(DatastoreError):
    def __init__(self, episode_id: str):
        super().__init__(f"duplicate episode_id {episode_id!r}")
        self.episode_id = episode_id


class SchemaVersionError(DatastoreError):
    def __init__(self, found: int):
        super().__init__(
            f"corpus schema version {found} is newer than supported "
            f"version {SCHEMA_VERSION}"
        )
        self.found = found


class AnnotationValidationError(DatastoreError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class FixtureParamsError(DatastoreError):
    """The fixture generator cannot satisfy the requested statistics."""


@dataclass
class Annotation:
    """Ground-truth sentence selection for one episode."""

    episode_id: str
    selected_indices: list[int]
    annotator_id: str
    created_at: str
    summary_duration_s: float
    revision: int = 1


@dataclass
class CorpusRecord:
    """One dataset row: an episode's sentences plus metadata and labels."""

    doc: SentenceDoc
    series_id: str = ""
    title: str = ""
    description: str = ""
    annotation: Annotation | None = None
    provenance: str = "original"

    @property
    def episode_id(self) -> str:
        return self.doc.episode_id


def summary_duration_s(doc: SentenceDoc, indices: list[int]) -> float:
    """Total spoken duration of the selected sentences."""
    return sum(doc.sentences[i].duration_ms for i in indices) / 1000.0


def check_indices(doc: SentenceDoc, indices: list[int]) -> None:
    if any(not isinstance(i, int) or not 0 <= i < len(doc) for i in indices):
        raise AnnotationValidationError(
            f"selection contains indices outside 0..{len(doc) - 1}"
        )
    if sorted(set(indices)) != list(indices):
        raise AnnotationValidationError("selection indices must be ascending and unique")


def make_annotation(
    doc: SentenceDoc,
    indices: list[int],
    annotator_id: str,
    created_at: str | None = None,
    revision: int = 1,
) -> Annotation:
    """Build a validated Annotation; the 30-120 s length rule is enforced here,
    at write time."""
    check_indices(doc, indices)
    duration = summary_duration_s(doc, indices)
    if duration < MIN_SUMMARY_S:
        raise AnnotationValidationError(
            f"below {MIN_SUMMARY_S:.0f}s minimum (selection is {duration:.1f}s)"
        )
    if duration > MAX_SUMMARY_S:
        raise AnnotationValidationError(
            f"above {MAX_SUMMARY_S:.0f}s maximum (selection is {duration:.1f}s)"
        )
    if created_at is None:
        created_at = datetime.now(timezone.utc).isoformat()
    return Annotation(doc.episode_id, list(indices), annotator_id, created_at,
                      duration, revision)


def labels_from_annotation(doc: SentenceDoc, annotation: Annotation) -> list[int]:
    """Binary label vector of length m: 1 at selected indices."""
    labels = [0] * len(doc)
    for index in annotation.selected_indices:
        if not 0 <= index < len(doc):
            raise IndexError(
                f"annotation index {index} out of range for {doc.episode_id!r} "
                f"with {len(doc)} sentences"
            )
        labels[index] = 1
    return labels


def record_to_dict(record: CorpusRecord) -> dict:
    annotation = None
    if record.annotation is not None:
        annotation = {
            "indices": record.annotation.selected_indices,
            "annotator_id": record.annotation.annotator_id,
            "created_at": record.annotation.created_at,
            "revision": record.annotation.revision,
        }
    return {
        "episode_id": record.doc.episode_id,
        "series_id": record.series_id,
        "title": record.title,
        "description": record.description,
        "audio_ref": record.doc.audio_ref,
        "duration_s": record.doc.duration_ms / 1000.0,
        "sentences": [sentence_to_dict(s) for s in record.doc.sentences],
        "annotation": annotation,
        "provenance": record.provenance,
    }


def record_from_dict(data: dict) -> CorpusRecord:
    doc = SentenceDoc(
        episode_id=data["episode_id"],
        sentences=[sentence_from_dict(s) for s in data.get("sentences", [])],
        audio_ref=data.get("audio_ref", ""),
        duration_ms=int(round(data.get("duration_s", 0.0) * 1000)),
    )
    annotation = None
    raw = data.get("annotation")
    if raw is not None:
        annotation = Annotation(
            episode_id=doc.episode_id,
            selected_indices=[int(i) for i in raw["indices"]],
            annotator_id=raw.get("annotator_id", ""),
            created_at=raw.get("created_at", ""),
            summary_duration_s=summary_duration_s(doc, [int(i) for i in raw["indices"]]),
            revision=int(raw.get("revision", 1)),
        )
    return CorpusRecord(
        doc=doc,
        series_id=data.get("series_id", ""),
        title=data.get("title", ""),
        description=data.get("description", ""),
        annotation=annotation,
        provenance=data.get("provenance", "original"),
    )


def save_corpus(records: list[CorpusRecord], path: str | Path) -> None:
    """Write a corpus as JSON lines, ordered by episode_id.

    Annotations are re-validated here: nothing violating the 30-120 s rule
    is ever committed to disk.
    """
    seen = set()
    for record in records:
        if record.episode_id in seen:
            raise DuplicateEpisodeError(record.episode_id)
        seen.add(record.episode_id)
        if record.annotation is not None:
            make_annotation(
                record.doc,
                record.annotation.selected_indices,
                record.annotation.annotator_id,
                created_at=record.annotation.created_at,
                revision=record.annotation.revision,
            )
    ordered = sorted(records, key=lambda r: r.episode_id)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": SCHEMA_NAME, "version": SCHEMA_VERSION}) + "\n")
        for record in ordered:
            fh.write(json.dumps(record_to_dict(record), sort_keys=True) + "\n")


def load_corpus(path: str | Path) -> list[CorpusRecord]:
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise DatastoreError(f"{path}: empty corpus file")
    header = json.loads(lines[0])
    if header.get("schema") != SCHEMA_NAME:
        raise DatastoreError(f"{path}: not a {SCHEMA_NAME} file")
    version = int(header.get("version", 0))
    if version > SCHEMA_VERSION:
        raise SchemaVersionError(version)
    records = []
    seen = set()
    for line in lines[1:]:
        record = record_from_dict(json.loads(line))
        if record.episode_id in seen:
            raise DuplicateEpisodeError(record.episode_id)
        seen.add(record.episode_id)
        records.append(record)
    return records


# --- synthetic fixture corpus ---

_TOPIC_POOLS = [
    ["climate", "energy", "solar", "carbon", "emissions", "policy", "turbines", "grid"],
    ["startup", "funding", "venture", "founders", "product", "growth", "markets", "revenue"],
    ["basketball", "playoffs", "defense", "coach", "roster", "trades", "season", "finals"],
    ["history", "empire", "merchants", "dynasty", "archives", "letters", "siege", "treaty"],
    ["sleep", "exercise", "nutrition", "stress", "habits", "recovery", "focus", "routine"],
    ["cinema", "director", "script", "casting", "premiere", "studio", "festival", "scenes"],
    ["telescope", "galaxy", "orbit", "mission", "probe", "signal", "lander", "craters"],
    ["inflation", "rates", "bonds", "earnings", "trading", "savings", "debt", "budgets"],
    ["recipes", "flavor", "spices", "kitchen", "baking", "harvest", "menus", "tasting"],
    ["islands", "borders", "railways", "festivals", "coastline", "villages", "routes", "maps"],
]

_FILLER_WORDS = [
    "the", "and", "we", "about", "that", "really", "today", "with", "this",
    "have", "more", "some", "talk", "think", "going", "very", "been", "into",
]

_SERIES_WORDS = [
    "daily", "weekly", "morning", "evening", "deep", "quick", "open", "inside",
    "beyond", "modern", "forward", "local", "global", "honest", "early", "late",
    "hidden", "plain", "bright", "quiet",
]

FIXTURE_CREATED_AT = "2020-06-01T00:00:00+00:00"


def _series_intro(rng: Random, series_word: str, topic: list[str]) -> list[tuple[str, int]]:
    """Per-series intro block: identical text and durations in every episode."""
    count = rng.randint(4, 6)
    lines = [
        f"Welcome to the {series_word} {topic[0]} show.",
        f"I am your host and this is the {series_word} rundown.",
        f"This podcast is brought to you by {series_word} audio partners.",
        f"Subscribe wherever you listen and leave us a review.",
        f"Head over to our website for tickets and more.",
        f"Okay here is the show for this week.",
    ]
    intro = []
    for text in lines[:count]:
        duration_ms = rng.randint(2000, 4000)
        intro.append((text, duration_ms))
    return intro


def _content_sentence(rng: Random, topic: list[str], density: float) -> tuple[str, int]:
    n_words = rng.randint(6, 13)
    words = [
        rng.choice(topic) if rng.random() < density else rng.choice(_FILLER_WORDS)
        for _ in range(n_words)
    ]
    words[0] = words[0].capitalize()
    per_word_ms = rng.randint(300, 420)
    return " ".join(words) + ".", n_words * per_word_ms


def _pick_annotation_run(
    sentences: list[Sentence],
    intro_len: int,
    first: int,
    target_count: int,
) -> list[int]:
    """A contiguous run of content sentences whose total duration lands
    inside the 30-120 s window."""
    m = len(sentences)
    chosen = []
    duration_ms = 0
    i = first
    while i < m and (len(chosen) < target_count or duration_ms < MIN_SUMMARY_S * 1000):
        chosen.append(i)
        duration_ms += sentences[i].duration_ms
        i += 1
    # extend backward if the tail of the document was too short
    j = first - 1
    while duration_ms < MIN_SUMMARY_S * 1000 and j >= intro_len:
        chosen.insert(0, j)
        duration_ms += sentences[j].duration_ms
        j -= 1
    while duration_ms > MAX_SUMMARY_S * 1000:
        duration_ms -= sentences[chosen[-1]].duration_ms
        chosen.pop()
    return chosen


def _tone_audio(doc: SentenceDoc, sample_rate: int) -> audio_mod.AudioClip:
    """Per-sentence sine tones with silent gaps; clip length equals the last
    sentence end exactly."""
    frames = doc.duration_ms * sample_rate // 1000
    samples = np.zeros(frames, dtype=np.int16)
    for sentence in doc.sentences:
        lo = sentence.start_ms * sample_rate // 1000
        hi = sentence.end_ms * sample_rate // 1000
        freq = 180.0 + 13.0 * (sentence.index % 40)
        t = np.arange(hi - lo, dtype=np.float64)
        tone = np.sin(2.0 * math.pi * freq * t / sample_rate) * 8000.0
        samples[lo:hi] = tone.astype(np.int16)
    return audio_mod.AudioClip(sample_rate, 1, samples.reshape(-1, 1))


def generate_fixture_corpus(
    n_series: int = 19,
    episodes_per_series_mean: float = 16.3,
    selected_mean: float = 14.57,
    seed: int = 0,
    audio_dir: str | Path | None = None,
    sample_rate: int = FIXTURE_SAMPLE_RATE,
    episodes_per_series_std: float = 6.28,
    selected_std: float = 7.01,
) -> list[CorpusRecord]:
    """Deterministic synthetic corpus with annotations and optional WAVs.

    Every episode of a series opens with the same planted intro block, the
    annotated sentences are a contiguous topic-dense run outside the intro,
    and (when ``audio_dir`` is given) each episode gets a tone WAV whose
    sample layout matches the sentence timestamps.
    """
    if n_series < 1:
        raise FixtureParamsError("n_series must be at least 1")
    if episodes_per_series_mean < 1:
        raise FixtureParamsError("episodes_per_series_mean must be at least 1")
    if not 1 <= selected_mean <= 20:
        raise FixtureParamsError(
            "selected_mean must stay within 1..20, the guaranteed content "
            "sentence count per episode"
        )
    rng = Random(seed)
    records: list[CorpusRecord] = []
    if audio_dir is not None:
        audio_dir = Path(audio_dir)
        audio_dir.mkdir(parents=True, exist_ok=True)

    for si in range(n_series):
        series_id = f"series{si:02d}"
        series_word = _SERIES_WORDS[si % len(_SERIES_WORDS)]
        topic = _TOPIC_POOLS[si % len(_TOPIC_POOLS)]
        intro = _series_intro(rng, series_word, topic)
        n_episodes = max(2, round(rng.gauss(episodes_per_series_mean, episodes_per_series_std)))

        for ei in range(n_episodes):
            episode_id = f"s{si:02d}e{ei:03d}"
            n_content = rng.randint(20, 34)
            target = max(6, min(round(rng.gauss(selected_mean, selected_std)), 26))

            # the annotated run is laid down as denser-topic sentences,
            # mimicking a core-message region
            run_slot_first = rng.randint(3, max(3, n_content - target - 2))
            texts: list[tuple[str, int]] = list(intro)
            for ci in range(n_content):
                dense = run_slot_first <= ci < run_slot_first + target
                texts.append(_content_sentence(rng, topic, 0.8 if dense else 0.4))

            sentences = []
            cursor = rng.randint(200, 500)
            for index, (text, duration_ms) in enumerate(texts):
                sentences.append(Sentence(index, text, cursor, cursor + duration_ms))
                cursor += duration_ms + rng.randint(150, 900)
            doc = SentenceDoc(
                episode_id=episode_id,
                sentences=sentences,
                audio_ref=f"{episode_id}.wav",
                duration_ms=sentences[-1].end_ms,
            )

            indices = _pick_annotation_run(
                sentences, len(intro), len(intro) + run_slot_first, target
            )
            annotation = make_annotation(
                doc, indices, "fixture-annotator", created_at=FIXTURE_CREATED_AT
            )

            if audio_dir is not None:
                wav_path = audio_dir / f"{episode_id}.wav"
                audio_mod.write_audio(_tone_audio(doc, sample_rate), wav_path)
                doc.audio_ref = str(wav_path)

            records.append(
                CorpusRecord(
                    doc=doc,
                    series_id=series_id,
                    title=f"{series_word.capitalize()} {topic[0]} episode {ei + 1}",
                    description=(
                        f"In this episode we discuss {topic[0]}, {topic[1]} "
                        f"and {topic[2]}."
                    ),
                    annotation=annotation,
                    provenance="original",
                )
            )
    return records
