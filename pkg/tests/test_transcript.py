from __future__ import annotations

import json
import random

import pytest
from helpers import MockHttpServer, asr_doc, asr_punct, asr_word

from podbrief.transcript import (
    PRONUNCIATION,
    PUNCTUATION,
    MalformedDocumentError,
    MissingTimestampsError,
    NonMonotoneTimestampsError,
    TranscriptionJobError,
    TranscriptionNetworkError,
    fetch_transcription,
    parse_transcript,
    serialize_transcript,
    transcript_from_dict,
    transcript_to_dict,
)


def test_parse_basic_two_tokens():
    raw = asr_doc([asr_word("Hello", "0.00", "0.40"), asr_punct(".")])
    t = parse_transcript(raw, "ep1", "ep1.wav")
    assert len(t.tokens) == 2
    hello, dot = t.tokens
    assert hello.content == "Hello"
    assert hello.kind == PRONUNCIATION
    assert (hello.start_ms, hello.end_ms) == (0, 400)
    assert hello.confidence == 0.99
    assert dot.kind == PUNCTUATION
    assert dot.start_ms is None and dot.end_ms is None
    assert t.duration_ms == 400


def test_parse_empty_document():
    t = parse_transcript(asr_doc([]), "ep1")
    assert t.tokens == []
    assert t.duration_ms == 0


def test_parse_accepts_json_string_and_bytes():
    raw = json.dumps(asr_doc([asr_word("hi", "1.5", "2.0")]))
    assert parse_transcript(raw, "e").tokens[0].start_ms == 1500
    assert parse_transcript(raw.encode(), "e").tokens[0].end_ms == 2000


def test_parse_rejects_large_regression_with_index():
    # second word starts 1.0 s before the first one ends: past the 0.5 s tolerance
    raw = asr_doc([asr_word("a", "1.0", "2.0"), asr_word("b", "1.0", "2.5")])
    with pytest.raises(NonMonotoneTimestampsError) as err:
        parse_transcript(raw, "ep1")
    assert err.value.index == 1


def test_parse_clamps_small_regression():
    raw = asr_doc([asr_word("a", "1.0", "2.0"), asr_word("b", "1.7", "2.5")])
    t = parse_transcript(raw, "ep1")
    assert t.tokens[1].start_ms == 2000  # clamped to the previous end
    assert t.tokens[1].end_ms == 2500


def test_parse_clamp_never_inverts_token():
    # regressing token that also ends before the previous end
    raw = asr_doc([asr_word("a", "1.0", "2.0"), asr_word("b", "1.6", "1.9")])
    t = parse_transcript(raw, "ep1")
    assert t.tokens[1].start_ms == 2000
    assert t.tokens[1].end_ms == 2000


@pytest.mark.parametrize(
    "raw",
    [
        {},
        {"results": {}},
        {"results": {"items": "nope"}},
        "not json {",
        asr_doc([{"type": "mystery", "alternatives": [{"content": "x"}]}]),
        asr_doc([{"type": "pronunciation", "alternatives": []}]),
        asr_doc([asr_word("x", "0.0", "1.0", conf="1.7")]),
        asr_doc([asr_word("x", "2.0", "1.0")]),  # start after end
    ],
)
def test_parse_rejects_malformed(raw):
    with pytest.raises(MalformedDocumentError):
        parse_transcript(raw, "ep1")


def test_parse_rejects_missing_timestamps():
    item = {
        "type": "pronunciation",
        "alternatives": [{"content": "x", "confidence": "0.9"}],
    }
    with pytest.raises(MissingTimestampsError) as err:
        parse_transcript(asr_doc([asr_word("ok", "0", "1"), item]), "ep1")
    assert err.value.index == 1


def test_parse_rejects_duration_shorter_than_content():
    raw = asr_doc([asr_word("a", "0.0", "5.0")])
    with pytest.raises(MalformedDocumentError):
        parse_transcript(raw, "ep1", duration_s=4.0)


def test_token_count_preserved():
    items = [asr_word("w%d" % i, i, i + 0.5) for i in range(10)]
    items.insert(4, asr_punct(","))
    t = parse_transcript(asr_doc(items), "ep1")
    assert len(t.tokens) == len(items)


def test_round_trip_native_format():
    rng = random.Random(42)
    for _ in range(50):
        items = []
        cursor = 0.0
        for i in range(rng.randrange(0, 20)):
            if items and rng.random() < 0.25:
                items.append(asr_punct(rng.choice(".?!,")))
            else:
                start = cursor + rng.randrange(0, 3000) / 1000
                end = start + rng.randrange(1, 2000) / 1000
                items.append(
                    asr_word(f"w{i}", f"{start:.3f}", f"{end:.3f}",
                             conf=str(rng.randrange(0, 101) / 100))
                )
                cursor = end
        t = parse_transcript(asr_doc(items), "ep", "a.wav")
        assert parse_transcript(serialize_transcript(t), "ep", "a.wav") == t


def test_pipeline_dict_round_trip():
    raw = asr_doc([asr_word("Hello", "0.00", "0.40"), asr_punct(".")])
    t = parse_transcript(raw, "ep1", "ep1.wav", duration_s=9.5)
    assert transcript_from_dict(transcript_to_dict(t)) == t


def test_fetch_transcription_returns_document_byte_identical():
    document = json.dumps(asr_doc([asr_word("hey", "0", "1")])).encode()
    routes = {
        ("POST", "/jobs"): (200, {"job_id": "j1", "status": "IN_PROGRESS"}),
        ("GET", "/jobs/j1"): (200, {"job_id": "j1", "status": "COMPLETED"}),
        ("GET", "/jobs/j1/document"): (200, document),
    }
    with MockHttpServer(routes) as server:
        got = fetch_transcription(server.url, "audio://x", poll_interval_s=0.01)
    assert got == document


def test_fetch_transcription_failed_job_carries_reason():
    routes = {
        ("POST", "/jobs"): (200, {"job_id": "j2", "status": "IN_PROGRESS"}),
        ("GET", "/jobs/j2"): (200, {"status": "FAILED", "reason": "bad channel count"}),
    }
    with MockHttpServer(routes) as server:
        with pytest.raises(TranscriptionJobError) as err:
            fetch_transcription(server.url, "audio://x", poll_interval_s=0.01)
    assert err.value.reason == "bad channel count"


def test_fetch_transcription_unreachable_endpoint():
    with pytest.raises(TranscriptionNetworkError):
        fetch_transcription("http://127.0.0.1:1", "audio://x", timeout_s=2)


def test_fetch_transcription_sends_credentials_header():
    routes = {
        ("POST", "/jobs"): (200, {"job_id": "j1", "status": "COMPLETED"}),
        ("GET", "/jobs/j1/document"): (200, b"{}"),
    }
    with MockHttpServer(routes) as server:
        fetch_transcription(server.url, "a", credentials="tok123")
        assert ("POST", "/jobs") in server.requests
