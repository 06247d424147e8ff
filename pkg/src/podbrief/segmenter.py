"""Split transcripts into timestamped sentences.

A sentence boundary is placed after sentence-final punctuation (. ? !) and
wherever the silence between two consecutive words exceeds the pause
threshold. Punctuation always attaches to the sentence before it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .transcript import Transcript, WordToken

SENTENCE_FINAL = frozenset({".", "?", "!"})

DEFAULT_PAUSE_THRESHOLD_S = 2.0


class EmptyDocumentError(ValueError):
    """The input contains no spoken words to segment or select from."""


@dataclass
class Sentence:
    """One timestamped sentence; the unit of selection and stitching."""

    index: int
    text: str
    start_ms: int
    end_ms: int
    token_range: tuple[int, int] | None = None

    @property
    def start_s(self) -> float:
        return self.start_ms / 1000.0

    @property
    def end_s(self) -> float:
        return self.end_ms / 1000.0

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


@dataclass
class SentenceDoc:
    """All sentences of one episode, in order, with contiguous indices."""

    episode_id: str
    sentences: list[Sentence] = field(default_factory=list)
    audio_ref: str = ""
    duration_ms: int = 0

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def duration_s(self) -> float:
        return self.duration_ms / 1000.0

    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]


def _render_text(tokens: list[WordToken]) -> str:
    # Words joined by single spaces; punctuation glued to the previous word.
    # Punctuation before the first word of the range has nothing to anchor
    # to and is dropped from the text.
    text = ""
    seen_word = False
    for tok in tokens:
        if tok.is_word():
            text += (" " if seen_word else "") + tok.content
            seen_word = True
        elif seen_word:
            text += tok.content
    return text


def segment(
    transcript: Transcript,
    pause_threshold_s: float = DEFAULT_PAUSE_THRESHOLD_S,
) -> SentenceDoc:
    """Split a Transcript into a SentenceDoc.

    Boundaries fall (a) before the word that follows sentence-final
    punctuation and (b) between words whose gap is strictly greater than
    ``pause_threshold_s``. The resulting token ranges are disjoint, ordered,
    and cover the whole token stream.
    """
    if pause_threshold_s <= 0:
        raise ValueError("pause_threshold_s must be positive")
    if not any(t.is_word() for t in transcript.tokens):
        raise EmptyDocumentError(
            f"transcript {transcript.episode_id!r} has no pronunciation tokens"
        )
    threshold_ms = round(pause_threshold_s * 1000)

    sentences: list[Sentence] = []

    def flush(lo: int, hi: int) -> None:
        chunk = transcript.tokens[lo:hi]
        words = [t for t in chunk if t.is_word()]
        sentences.append(
            Sentence(
                index=len(sentences),
                text=_render_text(chunk),
                start_ms=words[0].start_ms,
                end_ms=words[-1].end_ms,
                token_range=(lo, hi),
            )
        )

    range_start = 0
    open_words = False
    close_pending = False
    prev_word_end = 0
    for i, tok in enumerate(transcript.tokens):
        if not tok.is_word():
            if open_words and tok.content in SENTENCE_FINAL:
                close_pending = True
            continue
        gap_break = open_words and tok.start_ms - prev_word_end > threshold_ms
        if open_words and (close_pending or gap_break):
            flush(range_start, i)
            range_start = i
            close_pending = False
        open_words = True
        prev_word_end = tok.end_ms
    flush(range_start, len(transcript.tokens))

    return SentenceDoc(
        episode_id=transcript.episode_id,
        sentences=sentences,
        audio_ref=transcript.audio_ref,
        duration_ms=transcript.duration_ms,
    )


def sentence_to_dict(sentence: Sentence) -> dict:
    return {
        "index": sentence.index,
        "text": sentence.text,
        "start_s": sentence.start_ms / 1000.0,
        "end_s": sentence.end_ms / 1000.0,
    }


def sentence_from_dict(data: dict) -> Sentence:
    return Sentence(
        index=int(data["index"]),
        text=data["text"],
        start_ms=int(round(data["start_s"] * 1000)),
        end_ms=int(round(data["end_s"] * 1000)),
    )


def save_sentence_doc(doc: SentenceDoc, path: str | Path) -> None:
    """Write a SentenceDoc as JSON lines: a header record, then one record
    per sentence with index, text, start_s, end_s."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "episode_id": doc.episode_id,
            "audio_ref": doc.audio_ref,
            "duration_s": doc.duration_ms / 1000.0,
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for sentence in doc.sentences:
            fh.write(json.dumps(sentence_to_dict(sentence), sort_keys=True) + "\n")


def load_sentence_doc(path: str | Path) -> SentenceDoc:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty sentence file")
    header = json.loads(lines[0])
    sentences = [sentence_from_dict(json.loads(line)) for line in lines[1:] if line]
    sentences.sort(key=lambda s: s.index)
    return SentenceDoc(
        episode_id=header["episode_id"],
        sentences=sentences,
        audio_ref=header.get("audio_ref", ""),
        duration_ms=int(round(header.get("duration_s", 0.0) * 1000)),
    )
