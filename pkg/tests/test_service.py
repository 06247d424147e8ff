from __future__ import annotations

import io
import random
import time
import wave

import numpy as np
import pytest
from fastapi.testclient import TestClient
from helpers import make_doc

from podbrief.audio import AudioClip, write_audio
from podbrief.datastore import CorpusRecord, load_corpus, save_corpus
from podbrief.service import create_app


@pytest.fixture()
def corpus_path(tmp_path):
    """One 26-sentence episode, 5 s per sentence, with a tone WAV."""
    rows = []
    cursor = 0.5
    for i in range(26):
        rows.append((f"sentence {i} about topic {i % 5}", cursor, cursor + 5.0))
        cursor += 5.5
    doc = make_doc(rows, episode_id="ep-long")
    wav_path = tmp_path / "ep-long.wav"
    frames = doc.duration_ms * 8
    tone = (np.sin(np.arange(frames) * 0.04) * 10000).astype(np.int16).reshape(-1, 1)
    write_audio(AudioClip(8000, 1, tone), wav_path)
    doc.audio_ref = str(wav_path)

    path = tmp_path / "service-corpus.jsonl"
    save_corpus(
        [CorpusRecord(doc=doc, series_id="s0", title="Long episode",
                      description="A long fixture episode")],
        path,
    )
    return path


@pytest.fixture()
def client(corpus_path, tmp_path):
    app = create_app(corpus_path, preview_ttl_s=60.0, preview_dir=tmp_path / "previews")
    return TestClient(app)


def test_list_episodes(client):
    body = client.get("/episodes").json()
    assert body["next_cursor"] is None
    assert len(body["episodes"]) == 1
    episode = body["episodes"][0]
    assert episode["episode_id"] == "ep-long"
    assert episode["annotated"] is False
    assert episode["description"] == "A long fixture episode"


def test_episode_pagination_cursor(client):
    page = client.get("/episodes", params={"limit": 1}).json()
    assert len(page["episodes"]) == 1
    beyond = client.get("/episodes", params={"cursor": "5"}).json()
    assert beyond["episodes"] == []
    assert beyond["next_cursor"] is None


def test_sentences_with_audio_locators(client):
    body = client.get("/episodes/ep-long/sentences").json()
    sentences = body["sentences"]
    assert len(sentences) == 26
    starts = [s["start_s"] for s in sentences]
    assert starts == sorted(starts)
    locator = sentences[0]["audio"]
    assert locator["url"] == "/episodes/ep-long/audio"
    assert locator["byte_range"].startswith("bytes=")


def test_unknown_episode_404(client):
    assert client.get("/episodes/nope/sentences").status_code == 404
    assert client.put("/episodes/nope/annotation", json={"indices": []}).status_code == 404


def test_audio_byte_range_slice(client, corpus_path):
    sentences = client.get("/episodes/ep-long/sentences").json()["sentences"]
    byte_range = sentences[3]["audio"]["byte_range"]
    full = client.get("/episodes/ep-long/audio")
    assert full.status_code == 200
    sliced = client.get("/episodes/ep-long/audio", headers={"Range": byte_range})
    assert sliced.status_code == 206
    lo, hi = byte_range[len("bytes="):].split("-")
    assert sliced.content == full.content[int(lo): int(hi) + 1]
    # a sentence of 5 s mono 16-bit at 8 kHz is 80000 bytes
    assert len(sliced.content) == 80000


def test_audio_time_slice_is_valid_wav(client):
    resp = client.get("/episodes/ep-long/audio", params={"start_s": 0.5, "end_s": 5.5})
    assert resp.status_code == 200
    with wave.open(io.BytesIO(resp.content)) as wav:
        assert wav.getnframes() == 5 * 8000


def test_preview_valid_selection(client):
    indices = list(range(1, 13))  # 12 sentences x 5 s = 60 s
    resp = client.post("/episodes/ep-long/preview", json={"indices": indices}).json()
    assert resp["valid"] is True
    assert resp["validity_reason"] is None
    assert resp["total_duration_s"] == pytest.approx(60.0)
    assert resp["summary_text"].startswith("sentence 1 ")
    token = resp["audio_token"]
    audio = client.get(f"/previews/{token}")
    assert audio.status_code == 200
    with wave.open(io.BytesIO(audio.content)) as wav:
        assert wav.getnframes() == 60 * 8000


def test_preview_below_minimum(client):
    resp = client.post("/episodes/ep-long/preview", json={"indices": [0, 1]}).json()
    assert resp["valid"] is False
    assert resp["validity_reason"] == "below 30s minimum"
    assert resp["total_duration_s"] == pytest.approx(10.0)


def test_preview_above_maximum(client):
    resp = client.post("/episodes/ep-long/preview", json={"indices": list(range(25))}).json()
    assert resp["valid"] is False
    assert resp["validity_reason"] == "above 120s maximum"


def test_preview_empty_selection(client):
    resp = client.post("/episodes/ep-long/preview", json={"indices": []}).json()
    assert resp["valid"] is False
    assert resp["audio_token"] is None


def test_preview_invalid_indices_rejected(client):
    resp = client.post("/episodes/ep-long/preview", json={"indices": [99]})
    assert resp.status_code == 422


def test_preview_leaves_corpus_untouched(client, corpus_path):
    before = corpus_path.read_bytes()
    client.post("/episodes/ep-long/preview", json={"indices": list(range(1, 13))})
    assert corpus_path.read_bytes() == before


def test_preview_expires_after_ttl(corpus_path, tmp_path):
    app = create_app(corpus_path, preview_ttl_s=0.05, preview_dir=tmp_path / "p2")
    client = TestClient(app)
    resp = client.post("/episodes/ep-long/preview",
                       json={"indices": list(range(1, 13))}).json()
    token = resp["audio_token"]
    assert client.get(f"/previews/{token}").status_code == 200
    time.sleep(0.1)
    assert client.get(f"/previews/{token}").status_code == 404


def test_annotation_put_and_revisions(client, corpus_path):
    indices = list(range(1, 13))
    first = client.put("/episodes/ep-long/annotation",
                       json={"indices": indices, "annotator_id": "alice"})
    assert first.status_code == 200
    assert first.json()["revision"] == 1

    second = client.put("/episodes/ep-long/annotation",
                        json={"indices": indices[:-1] + [20], "annotator_id": "bob"})
    assert second.json()["revision"] == 2

    stored = client.get("/episodes/ep-long/annotation").json()["annotation"]
    assert stored["revision"] == 2
    assert stored["annotator_id"] == "bob"

    # persisted: a fresh app over the same corpus file sees revision 2
    reloaded = TestClient(create_app(corpus_path)).get("/episodes/ep-long/annotation")
    assert reloaded.json()["annotation"]["revision"] == 2

    log_path = corpus_path.parent / (corpus_path.name + ".annotations.log")
    assert log_path.exists()
    assert len(log_path.read_text().strip().splitlines()) == 2


def test_annotation_rejections_persist_nothing(client, corpus_path):
    too_short = client.put("/episodes/ep-long/annotation",
                           json={"indices": [0], "annotator_id": "alice"})
    assert too_short.status_code == 422
    assert "below 30s" in too_short.json()["detail"]

    too_long = client.put("/episodes/ep-long/annotation",
                          json={"indices": list(range(25)), "annotator_id": "alice"})
    assert too_long.status_code == 422
    assert "above 120s" in too_long.json()["detail"]

    bad = client.put("/episodes/ep-long/annotation",
                     json={"indices": [40], "annotator_id": "alice"})
    assert bad.status_code == 422

    assert client.get("/episodes/ep-long/annotation").json()["annotation"] is None
    assert load_corpus(corpus_path)[0].annotation is None


def test_annotated_flag_reflects_put(client):
    assert client.get("/episodes").json()["episodes"][0]["annotated"] is False
    client.put("/episodes/ep-long/annotation",
               json={"indices": list(range(1, 13)), "annotator_id": "a"})
    assert client.get("/episodes").json()["episodes"][0]["annotated"] is True


def test_fuzzed_puts_never_persist_invalid_durations(client, corpus_path):
    # random selections; whatever the server accepts must satisfy 30-120 s,
    # and the persisted corpus must only ever hold valid annotations
    rng = random.Random(99)
    accepted = 0
    for _ in range(60):
        count = rng.randrange(0, 26)
        indices = sorted(rng.sample(range(26), count))
        resp = client.put("/episodes/ep-long/annotation",
                          json={"indices": indices, "annotator_id": "fuzz"})
        duration = 5.0 * count
        if 30.0 <= duration <= 120.0:
            assert resp.status_code == 200
            accepted += 1
        else:
            assert resp.status_code == 422
        stored = load_corpus(corpus_path)[0].annotation
        if stored is not None:
            assert 30.0 <= stored.summary_duration_s <= 120.0
    assert accepted > 0
    assert load_corpus(corpus_path)[0].annotation.revision == accepted
