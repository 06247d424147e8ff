"""Parse ASR result documents into validated in-memory transcripts.

The input format is a JSON document with a ``results.items`` array as
produced by common cloud transcription services: each item carries a type
("pronunciation" or "punctuation"), an ``alternatives`` list whose first
entry holds the text and a decimal-string confidence, and, for
pronunciations, decimal-string ``start_time``/``end_time`` in seconds.

Timestamps are held internally as integer milliseconds so span arithmetic
and sample mapping stay exact.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

import requests

PRONUNCIATION = "pronunciation"
PUNCTUATION = "punctuation"

# Tolerated start-time regression against the previous pronunciation's end.
# Smaller regressions are clamped; anything past this is corrupt input.
MAX_REGRESSION_MS = 500


class TranscriptError(ValueError):
    """Base class for transcript parsing failures."""


class MalformedDocumentError(TranscriptError):
    """Document is not in the expected ASR item format."""


class MissingTimestampsError(TranscriptError):
    """A pronunciation item lacks start or end time."""

    def __init__(self, index: int):
        super().__init__(f"pronunciation item {index} is missing timestamps")
        self.index = index


class NonMonotoneTimestampsError(TranscriptError):
    """A pronunciation starts too far before the previous one ended."""

    def __init__(self, index: int, regression_ms: int):
        super().__init__(
            f"pronunciation item {index} starts {regression_ms} ms before the "
            f"previous item ended (tolerance {MAX_REGRESSION_MS} ms)"
        )
        self.index = index
        self.regression_ms = regression_ms


class TranscriptionServiceError(RuntimeError):
    """Base class for transcription service client failures."""


class TranscriptionNetworkError(TranscriptionServiceError):
    """The service endpoint could not be reached."""


class TranscriptionJobError(TranscriptionServiceError):
    """The service reported a failed transcription job."""

    def __init__(self, reason: str):
        super().__init__(f"transcription job failed: {reason}")
        self.reason = reason


class TranscriptionTimeout(TranscriptionServiceError):
    """The job did not finish within the allotted time."""


@dataclass(frozen=True)
class WordToken:
    """One ASR item: a spoken word or a punctuation mark."""

    content: str
    kind: str  # PRONUNCIATION or PUNCTUATION
    start_ms: int | None = None
    end_ms: int | None = None
    confidence: float = 1.0

    @property
    def start_s(self) -> float | None:
        return self.start_ms / 1000.0 if self.start_ms is not None else None

    @property
    def end_s(self) -> float | None:
        return self.end_ms / 1000.0 if self.end_ms is not None else None

    def is_word(self) -> bool:
        return self.kind == PRONUNCIATION


@dataclass
class Transcript:
    """An episode's full token stream plus audio metadata."""

    episode_id: str
    tokens: list[WordToken] = field(default_factory=list)
    audio_ref: str = ""
    duration_ms: int = 0

    @property
    def duration_s(self) -> float:
        return self.duration_ms / 1000.0

    def word_tokens(self) -> list[WordToken]:
        return [t for t in self.tokens if t.is_word()]


def _parse_seconds(value, index: int, what: str) -> int:
    """Decimal-string seconds -> integer milliseconds."""
    try:
        ms = Decimal(str(value)) * 1000
    except InvalidOperation:
        raise MalformedDocumentError(f"item {index}: bad {what} {value!r}") from None
    return int(ms.to_integral_value())


def _format_seconds(ms: int) -> str:
    return f"{ms // 1000}.{ms % 1000:03d}"


def parse_transcript(
    raw,
    episode_id: str,
    audio_ref: str = "",
    duration_s: float | None = None,
) -> Transcript:
    """Parse a raw ASR result document into a validated Transcript.

    ``raw`` may be a parsed dict, a JSON string, or JSON bytes. Rejection is
    total: any malformed item aborts the parse, so a partially built
    Transcript is never returned. Start-time regressions up to 0.5 s against
    the previous word's end are clamped to that end; larger regressions are
    treated as corruption and rejected with the offending item index.
    """
    if isinstance(raw, (bytes, str)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedDocumentError(f"not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise MalformedDocumentError("document must be a JSON object")
    try:
        items = raw["results"]["items"]
    except (KeyError, TypeError):
        raise MalformedDocumentError("document lacks a results.items array") from None
    if not isinstance(items, list):
        raise MalformedDocumentError("results.items must be an array")

    tokens: list[WordToken] = []
    prev_end_ms: int | None = None
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise MalformedDocumentError(f"item {i} is not an object")
        kind = item.get("type")
        if kind not in (PRONUNCIATION, PUNCTUATION):
            raise MalformedDocumentError(f"item {i}: unknown type {kind!r}")
        alts = item.get("alternatives")
        if not alts or not isinstance(alts, list) or not isinstance(alts[0], dict):
            raise MalformedDocumentError(f"item {i}: missing alternatives")
        top = alts[0]
        content = top.get("content")
        if not isinstance(content, str) or not content:
            raise MalformedDocumentError(f"item {i}: missing content")
        try:
            confidence = float(top.get("confidence", 1.0))
        except (TypeError, ValueError):
            raise MalformedDocumentError(f"item {i}: bad confidence") from None
        if not 0.0 <= confidence <= 1.0:
            raise MalformedDocumentError(
                f"item {i}: confidence {confidence} outside [0, 1]"
            )

        if kind == PUNCTUATION:
            tokens.append(WordToken(content, PUNCTUATION, confidence=confidence))
            continue

        if "start_time" not in item or "end_time" not in item:
            raise MissingTimestampsError(i)
        start_ms = _parse_seconds(item["start_time"], i, "start_time")
        end_ms = _parse_seconds(item["end_time"], i, "end_time")
        if start_ms > end_ms:
            raise MalformedDocumentError(
                f"item {i}: start_time {_format_seconds(start_ms)} after "
                f"end_time {_format_seconds(end_ms)}"
            )
        if prev_end_ms is not None and start_ms < prev_end_ms:
            regression = prev_end_ms - start_ms
            if regression > MAX_REGRESSION_MS:
                raise NonMonotoneTimestampsError(i, regression)
            start_ms = prev_end_ms
            end_ms = max(end_ms, start_ms)
        tokens.append(WordToken(content, PRONUNCIATION, start_ms, end_ms, confidence))
        prev_end_ms = end_ms

    last_end = max((t.end_ms for t in tokens if t.is_word()), default=0)
    if duration_s is None:
        duration_ms = last_end
    else:
        duration_ms = int(round(duration_s * 1000))
        if duration_ms < last_end:
            raise MalformedDocumentError(
                f"declared duration {duration_s} s is shorter than the last "
                f"word end {_format_seconds(last_end)} s"
            )
    return Transcript(episode_id, tokens, audio_ref, duration_ms)


def serialize_transcript(transcript: Transcript) -> dict:
    """Render a Transcript back into the native ASR document format.

    ``parse_transcript(serialize_transcript(t), ...)`` reproduces ``t``.
    """
    items = []
    for token in transcript.tokens:
        entry: dict = {
            "type": token.kind,
            "alternatives": [
                {"content": token.content, "confidence": repr(token.confidence)}
            ],
        }
        if token.is_word():
            entry["start_time"] = _format_seconds(token.start_ms)
            entry["end_time"] = _format_seconds(token.end_ms)
        items.append(entry)
    return {"results": {"items": items}}


def transcript_to_dict(transcript: Transcript) -> dict:
    """Pipeline-file form of a Transcript (episode metadata plus tokens)."""
    return {
        "episode_id": transcript.episode_id,
        "audio_ref": transcript.audio_ref,
        "duration_s": transcript.duration_ms / 1000.0,
        "document": serialize_transcript(transcript),
    }


def transcript_from_dict(data: dict) -> Transcript:
    return parse_transcript(
        data["document"],
        episode_id=data["episode_id"],
        audio_ref=data.get("audio_ref", ""),
        duration_s=data.get("duration_s"),
    )


def fetch_transcription(
    service_endpoint: str,
    audio_ref: str,
    credentials: str | None = None,
    timeout_s: float = 60.0,
    poll_interval_s: float = 0.1,
) -> bytes:
    """Fetch a raw ASR result document from a transcription service.

    Submits a job for ``audio_ref``, polls until it settles, and returns
    the served document bytes untouched. Network failures, service-side job
    failures, and timeouts surface as distinct exceptions.
    """
    base = service_endpoint.rstrip("/")
    headers = {}
    if credentials:
        headers["Authorization"] = f"Bearer {credentials}"
    deadline = time.monotonic() + timeout_s

    def _request(method: str, url: str, **kwargs):
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise TranscriptionTimeout(f"no result from {base} within {timeout_s} s")
        try:
            resp = requests.request(
                method, url, headers=headers, timeout=remaining, **kwargs
            )
        except requests.exceptions.Timeout:
            raise TranscriptionTimeout(
                f"no result from {base} within {timeout_s} s"
            ) from None
        except requests.exceptions.RequestException as exc:
            raise TranscriptionNetworkError(f"cannot reach {base}: {exc}") from None
        if resp.status_code >= 400:
            raise TranscriptionJobError(f"HTTP {resp.status_code}: {resp.text}")
        return resp

    job = _request("POST", f"{base}/jobs", json={"audio_ref": audio_ref}).json()
    job_id = job.get("job_id")
    if not job_id:
        raise TranscriptionJobError("service did not return a job_id")

    status = job.get("status", "IN_PROGRESS")
    while status not in ("COMPLETED", "FAILED"):
        time.sleep(poll_interval_s)
        job = _request("GET", f"{base}/jobs/{job_id}").json()
        status = job.get("status", "IN_PROGRESS")
    if status == "FAILED":
        raise TranscriptionJobError(str(job.get("reason", "unspecified")))
    return _request("GET", f"{base}/jobs/{job_id}/document").content
