"""Score sentences and select the top-k as the summary.

Scorers are pluggable: a LEAD baseline, a deterministic offline scorer
(term-frequency cosine against the document centroid), and an adapter for
an out-of-process neural scorer behind a small HTTP protocol.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

import requests

from .segmenter import EmptyDocumentError, SentenceDoc

DEFAULT_MAX_TOKENS = 512
DEFAULT_TOP_K = 12

_WORD_RE = re.compile(r"[a-z0-9]+")


class ScorerError(RuntimeError):
    """Base class for external scorer failures."""


class ScorerConnectionError(ScorerError):
    """The scorer endpoint could not be reached or timed out."""


class ScoreLengthMismatchError(ScorerError):
    """The scorer returned the wrong number of scores."""

    def __init__(self, expected: int, got: int):
        super().__init__(f"expected {expected} scores, got {got}")
        self.expected = expected
        self.got = got


class ScoreRangeError(ScorerError):
    """The scorer returned a value outside [0, 1]."""

    def __init__(self, index: int, value: float):
        super().__init__(f"score {value!r} at position {index} outside [0, 1]")
        self.index = index
        self.value = value


@dataclass
class SentenceScores:
    """One score in [0, 1] per sentence, aligned by index."""

    episode_id: str
    scores: list[float] = field(default_factory=list)


@dataclass
class Selection:
    """The chosen sentence indices, ascending, so audio plays in order."""

    episode_id: str
    indices: list[int] = field(default_factory=list)
    k_requested: int = 0


def lead_n(doc: SentenceDoc, n: int) -> Selection:
    """LEAD-n baseline: the first min(n, m) sentences."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not doc.sentences:
        raise EmptyDocumentError(f"document {doc.episode_id!r} has no sentences")
    return Selection(doc.episode_id, list(range(min(n, len(doc)))), k_requested=n)


def truncate_tokens(doc: SentenceDoc, max_tokens: int = DEFAULT_MAX_TOKENS) -> SentenceDoc:
    """Keep the longest whole-sentence prefix within a word budget.

    Words are whitespace-delimited; the first sentence is kept even when it
    alone exceeds the budget. Idempotent.
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be at least 1")
    if not doc.sentences:
        raise EmptyDocumentError(f"document {doc.episode_id!r} has no sentences")
    kept = []
    used = 0
    for sentence in doc.sentences:
        used += len(sentence.text.split())
        if used > max_tokens and kept:
            break
        kept.append(sentence)
    return SentenceDoc(doc.episode_id, kept, doc.audio_ref, doc.duration_ms)


def select_top_k(scores: SentenceScores, k: int) -> Selection:
    """Indices of the k highest scores, ties toward the lower index,
    returned ascending."""
    if k < 1:
        raise ValueError("k must be at least 1")
    m = len(scores.scores)
    ranked = sorted(range(m), key=lambda i: (-scores.scores[i], i))
    return Selection(scores.episode_id, sorted(ranked[:k]), k_requested=k)


def _tf(text: str) -> Counter:
    return Counter(_WORD_RE.findall(text.lower()))


def _cosine(vec: Counter, other: dict[str, float]) -> float:
    dot = sum(count * other.get(term, 0.0) for term, count in vec.items())
    if dot == 0.0:
        return 0.0
    norm_a = math.sqrt(sum(c * c for c in vec.values()))
    norm_b = math.sqrt(sum(v * v for v in other.values()))
    return dot / (norm_a * norm_b)


def reference_scorer(
    doc: SentenceDoc,
    repetitive_runs: list[tuple[int, int]] | None = None,
) -> SentenceScores:
    """Deterministic offline scorer.

    Each sentence's term-frequency vector is scored by cosine similarity
    against the document centroid, then min-max normalized into [0, 1].
    Sentences inside ``repetitive_runs`` (inclusive index pairs) are forced
    to zero so known intro/ad content never wins selection.
    """
    if not doc.sentences:
        raise EmptyDocumentError(f"document {doc.episode_id!r} has no sentences")
    vectors = [_tf(s.text) for s in doc.sentences]
    centroid: dict[str, float] = {}
    for vec in vectors:
        for term, count in vec.items():
            centroid[term] = centroid.get(term, 0.0) + count / len(vectors)
    raw = [_cosine(vec, centroid) for vec in vectors]

    lo, hi = min(raw), max(raw)
    if hi > lo:
        scores = [(value - lo) / (hi - lo) for value in raw]
    else:
        scores = [1.0] * len(raw)

    for first, last in repetitive_runs or []:
        for i in range(first, last + 1):
            if 0 <= i < len(scores):
                scores[i] = 0.0
    return SentenceScores(doc.episode_id, scores)


def external_scorer(
    endpoint: str,
    doc: SentenceDoc,
    timeout_s: float = 30.0,
) -> SentenceScores:
    """Fetch scores for ``doc`` from a scorer service.

    POSTs ``{episode_id, sentences}`` to ``{endpoint}/score`` and validates
    the response for length and range before returning it.
    """
    if not doc.sentences:
        raise EmptyDocumentError(f"document {doc.episode_id!r} has no sentences")
    url = endpoint.rstrip("/")
    if not url.endswith("/score"):
        url += "/score"
    payload = {"episode_id": doc.episode_id, "sentences": doc.texts()}
    try:
        resp = requests.post(url, json=payload, timeout=timeout_s)
    except requests.exceptions.RequestException as exc:
        raise ScorerConnectionError(f"cannot reach scorer at {url}: {exc}") from None
    try:
        body = resp.json()
    except ValueError:
        raise ScorerError(f"scorer returned non-JSON response: {resp.text[:200]}") from None
    if resp.status_code >= 400 or "error" in body:
        raise ScorerError(f"scorer error: {body.get('error', resp.text[:200])}")

    scores = body.get("scores")
    if not isinstance(scores, list) or len(scores) != len(doc):
        got = len(scores) if isinstance(scores, list) else 0
        raise ScoreLengthMismatchError(len(doc), got)
    validated = []
    for i, value in enumerate(scores):
        if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
            raise ScoreRangeError(i, value)
        validated.append(float(value))
    return SentenceScores(doc.episode_id, validated)
