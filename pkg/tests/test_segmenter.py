from __future__ import annotations

import random

import pytest
from helpers import make_transcript, punct, word

from podbrief.segmenter import (
    EmptyDocumentError,
    load_sentence_doc,
    save_sentence_doc,
    segment,
)
from podbrief.transcript import Transcript


def test_punctuation_break():
    t = make_transcript([word("Hello", 0.0, 0.4), punct("."), word("world", 0.8, 1.2)])
    doc = segment(t)
    assert [(s.text, s.start_s, s.end_s) for s in doc.sentences] == [
        ("Hello.", 0.0, 0.4),
        ("world", 0.8, 1.2),
    ]


def test_pause_break_strictly_over_threshold():
    t = make_transcript([word("foo", 0.0, 1.0), word("bar", 3.5, 4.0)])
    doc = segment(t, pause_threshold_s=2.0)
    assert len(doc) == 2  # gap of 2.5 s


def test_exact_threshold_gap_does_not_break():
    t = make_transcript([word("foo", 0.0, 1.0), word("bar", 3.0, 4.0)])
    doc = segment(t, pause_threshold_s=2.0)
    assert len(doc) == 1  # a 2.0 s pause is not "over" the threshold
    assert doc.sentences[0].text == "foo bar"


def test_question_and_exclamation_split():
    t = make_transcript(
        [word("Really", 0, 0.5), punct("?"), word("Yes", 1, 1.4), punct("!"),
         word("ok", 2, 2.2)]
    )
    assert [s.text for s in segment(t).sentences] == ["Really?", "Yes!", "ok"]


def test_comma_never_splits():
    t = make_transcript([word("a", 0, 0.2), punct(","), word("b", 0.5, 0.7)])
    doc = segment(t)
    assert [s.text for s in doc.sentences] == ["a, b"]


def test_trailing_punctuation_attaches_to_last_sentence():
    t = make_transcript([word("End", 0, 0.5), punct("."), punct("?")])
    doc = segment(t)
    assert len(doc) == 1
    assert doc.sentences[0].text == "End.?"
    assert doc.sentences[0].token_range == (0, 3)


def test_leading_punctuation_dropped_from_text_kept_in_range():
    t = make_transcript([punct("."), word("Start", 0, 0.5)])
    doc = segment(t)
    assert doc.sentences[0].text == "Start"
    assert doc.sentences[0].token_range == (0, 2)


def test_abbreviations_are_not_special_cased():
    words = [word("It", 0, 0.2), word("is", 0.3, 0.4), word("7:30", 0.5, 1.0),
             word("p", 1.1, 1.2), punct("."), word("m", 1.3, 1.4), punct("."),
             word("On", 1.5, 1.7), word("January", 1.8, 2.2), word("30th", 2.3, 2.8),
             punct(".")]
    doc = segment(make_transcript(words))
    assert [s.text for s in doc.sentences] == ["It is 7:30 p.", "m.", "On January 30th."]


def test_empty_document_error():
    with pytest.raises(EmptyDocumentError):
        segment(make_transcript([punct(".")]))
    with pytest.raises(EmptyDocumentError):
        segment(Transcript("ep1"))


def test_bad_threshold():
    with pytest.raises(ValueError):
        segment(make_transcript([word("a", 0, 1)]), pause_threshold_s=0)


def _random_transcript(rng: random.Random) -> Transcript:
    tokens = []
    cursor = 0.0
    for i in range(rng.randrange(1, 60)):
        if tokens and rng.random() < 0.2:
            tokens.append(punct(rng.choice(".?!,")))
        else:
            start = cursor + rng.randrange(0, 4000) / 1000
            end = start + rng.randrange(100, 1500) / 1000
            tokens.append(word(f"w{i}", start, end))
            cursor = end
    if not any(t.is_word() for t in tokens):
        tokens.append(word("w", cursor, cursor + 0.5))
    return make_transcript(tokens)


def test_token_ranges_partition_the_transcript():
    rng = random.Random(7)
    for _ in range(100):
        t = _random_transcript(rng)
        doc = segment(t)
        covered = []
        for s in doc.sentences:
            lo, hi = s.token_range
            covered.extend(range(lo, hi))
        assert covered == list(range(len(t.tokens)))
        # each sentence contains at least one word and carries its times
        for s in doc.sentences:
            in_range = [t.tokens[i] for i in range(*s.token_range) if t.tokens[i].is_word()]
            assert in_range
            assert s.start_ms == in_range[0].start_ms
            assert s.end_ms == in_range[-1].end_ms


def test_adjacent_sentences_justified_by_punct_or_gap():
    rng = random.Random(11)
    for _ in range(100):
        t = _random_transcript(rng)
        threshold = rng.choice([0.5, 1.0, 2.0, 3.0])
        doc = segment(t, pause_threshold_s=threshold)
        for earlier, later in zip(doc.sentences, doc.sentences[1:]):
            gap_s = (later.start_ms - earlier.end_ms) / 1000
            # trailing punctuation of the earlier sentence must include a
            # sentence-final mark, unless the pause alone justified the break
            lo, hi = earlier.token_range
            trailing = []
            for tok in reversed(t.tokens[lo:hi]):
                if tok.is_word():
                    break
                trailing.append(tok.content)
            ends_final = any(mark in trailing for mark in ".?!")
            assert ends_final or gap_s > threshold


def test_lowering_threshold_never_decreases_sentence_count():
    rng = random.Random(13)
    for _ in range(100):
        t = _random_transcript(rng)
        high = rng.randrange(5, 40) / 10
        low = high - rng.randrange(1, 30) / 10
        if low <= 0:
            low = 0.05
        assert len(segment(t, low)) >= len(segment(t, high))


def test_sentence_doc_round_trip(tmp_path):
    t = make_transcript(
        [word("Hello", 0.0, 0.4), punct("."), word("big", 0.8, 1.2),
         word("world", 1.3, 2.0)]
    )
    doc = segment(t)
    path = tmp_path / "doc.jsonl"
    save_sentence_doc(doc, path)
    loaded = load_sentence_doc(path)
    assert loaded.episode_id == doc.episode_id
    assert loaded.duration_ms == doc.duration_ms
    assert loaded.audio_ref == doc.audio_ref
    assert [(s.index, s.text, s.start_ms, s.end_ms) for s in loaded.sentences] == [
        (s.index, s.text, s.start_ms, s.end_ms) for s in doc.sentences
    ]
