"""HTTP backend for the annotation workflow.

Serves episodes and their sentences (with audio locators), stitches
on-demand summary previews, validates the 30-120 s length rule, and
persists annotation revisions. Sentence audio is addressed as byte-range
slices of the episode WAV; previews are ephemeral files evicted after a
TTL.
"""

from __future__ import annotations

import io
import json
import struct
import tempfile
import threading
import time
import uuid
import wave
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import audio as audio_mod
from .datastore import (
    MAX_SUMMARY_S,
    MIN_SUMMARY_S,
    AnnotationValidationError,
    check_indices,
    load_corpus,
    make_annotation,
    save_corpus,
)
from .evaluation import selection_text
from .summarizer import Selection

DEFAULT_PREVIEW_TTL_S = 300.0


class PreviewRequest(BaseModel):
    indices: list[int]


class AnnotationRequest(BaseModel):
    indices: list[int]
    annotator_id: str = "anonymous"


def _wav_data_offset(path: Path) -> tuple[int, int]:
    """Byte offset and size of the data chunk inside a RIFF WAV file."""
    with open(path, "rb") as fh:
        header = fh.read(12)
        if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
            raise audio_mod.UnsupportedEncodingError(f"{path}: not a RIFF WAV file")
        while True:
            chunk = fh.read(8)
            if len(chunk) < 8:
                raise audio_mod.TruncatedFileError(f"{path}: no data chunk found")
            chunk_id, size = struct.unpack("<4sI", chunk)
            if chunk_id == b"data":
                return fh.tell(), size
            fh.seek(size + size % 2, io.SEEK_CUR)


def _clip_to_wav_bytes(clip: audio_mod.AudioClip) -> bytes:
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(clip.channels)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(clip.samples.astype("<i2").tobytes())
    return buf.getvalue()


class _Episode:
    """Server-side state for one corpus record."""

    def __init__(self, record, audio_base: Path | None):
        self.record = record
        self.lock = threading.Lock()
        ref = record.doc.audio_ref
        path = Path(ref) if ref else None
        if path is not None and not path.is_absolute() and audio_base is not None:
            path = audio_base / path
        self.audio_path = path if path is not None and path.is_file() else None
        self._layout = None

    def audio_layout(self):
        if self.audio_path is None:
            return None
        if self._layout is None:
            data_offset, _ = _wav_data_offset(self.audio_path)
            clip_meta = wave.open(str(self.audio_path), "rb")
            try:
                self._layout = (
                    data_offset,
                    clip_meta.getframerate(),
                    clip_meta.getnchannels() * clip_meta.getsampwidth(),
                )
            finally:
                clip_meta.close()
        return self._layout


def create_app(
    corpus_path: str | Path,
    preview_ttl_s: float = DEFAULT_PREVIEW_TTL_S,
    preview_dir: str | Path | None = None,
    audio_base: str | Path | None = None,
) -> FastAPI:
    """Build the annotation service around one corpus file."""
    corpus_path = Path(corpus_path)
    audio_base = Path(audio_base) if audio_base is not None else corpus_path.parent
    records = load_corpus(corpus_path)
    episodes = {
        r.episode_id: _Episode(r, audio_base)
        for r in sorted(records, key=lambda r: r.episode_id)
    }
    order = sorted(episodes)
    previews: dict[str, tuple[Path, float]] = {}
    previews_lock = threading.Lock()
    save_lock = threading.Lock()
    preview_root = Path(preview_dir) if preview_dir else Path(tempfile.mkdtemp(prefix="podbrief-previews-"))
    preview_root.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="podbrief annotation service")

    def _episode_or_404(episode_id: str) -> _Episode:
        episode = episodes.get(episode_id)
        if episode is None:
            raise HTTPException(status_code=404, detail=f"unknown episode {episode_id!r}")
        return episode

    def _evict_expired() -> None:
        now = time.monotonic()
        with previews_lock:
            for token in [t for t, (_, exp) in previews.items() if exp < now]:
                path, _ = previews.pop(token)
                path.unlink(missing_ok=True)

    def _persist(episode: _Episode) -> None:
        with save_lock:
            save_corpus([e.record for e in episodes.values()], corpus_path)
            annotation = episode.record.annotation
            log_line = {
                "episode_id": episode.record.episode_id,
                "revision": annotation.revision,
                "indices": annotation.selected_indices,
                "annotator_id": annotation.annotator_id,
                "created_at": annotation.created_at,
            }
            with open(f"{corpus_path}.annotations.log", "a", encoding="utf-8") as fh:
                fh.write(json.dumps(log_line, sort_keys=True) + "\n")

    @app.get("/episodes")
    def list_episodes(cursor: str | None = None, limit: int = Query(50, ge=1, le=500)):
        try:
            offset = int(cursor) if cursor else 0
        except ValueError:
            raise HTTPException(status_code=422, detail=f"bad cursor {cursor!r}") from None
        page = order[offset : offset + limit]
        body = [
            {
                "episode_id": eid,
                "title": episodes[eid].record.title,
                "description": episodes[eid].record.description,
                "duration_s": episodes[eid].record.doc.duration_s,
                "annotated": episodes[eid].record.annotation is not None,
            }
            for eid in page
        ]
        next_cursor = str(offset + limit) if offset + limit < len(order) else None
        return {"episodes": body, "next_cursor": next_cursor}

    @app.get("/episodes/{episode_id}/sentences")
    def list_sentences(episode_id: str):
        episode = _episode_or_404(episode_id)
        layout = episode.audio_layout()
        sentences = []
        for s in episode.record.doc.sentences:
            locator = None
            if layout is not None:
                data_offset, rate, frame_bytes = layout
                first = data_offset + audio_mod.ms_to_sample(s.start_ms, rate) * frame_bytes
                last = data_offset + audio_mod.ms_to_sample(s.end_ms, rate) * frame_bytes - 1
                locator = {
                    "url": f"/episodes/{episode_id}/audio",
                    "byte_range": f"bytes={first}-{last}",
                    "query": f"/episodes/{episode_id}/audio?start_s={s.start_s}&end_s={s.end_s}",
                }
            sentences.append(
                {
                    "index": s.index,
                    "text": s.text,
                    "start_s": s.start_s,
                    "end_s": s.end_s,
                    "duration_s": s.duration_ms / 1000.0,
                    "audio": locator,
                }
            )
        return {"episode_id": episode_id, "sentences": sentences}

    @app.get("/episodes/{episode_id}/audio")
    def episode_audio(
        episode_id: str,
        request: Request,
        start_s: float | None = None,
        end_s: float | None = None,
    ):
        episode = _episode_or_404(episode_id)
        if episode.audio_path is None:
            raise HTTPException(status_code=404, detail="no audio for this episode")
        if start_s is not None or end_s is not None:
            clip = audio_mod.read_audio(episode.audio_path)
            span = audio_mod.Span(
                int(round((start_s or 0.0) * 1000)),
                int(round((end_s if end_s is not None else clip.duration_s) * 1000)),
            )
            try:
                piece = audio_mod.stitch(clip, [span])
            except audio_mod.SpanError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
            return Response(content=_clip_to_wav_bytes(piece), media_type="audio/wav")

        blob = episode.audio_path.read_bytes()
        range_header = request.headers.get("range")
        if range_header and range_header.startswith("bytes="):
            try:
                lo_s, hi_s = range_header[len("bytes=") :].split("-", 1)
                lo = int(lo_s)
                hi = int(hi_s) if hi_s else len(blob) - 1
            except ValueError:
                raise HTTPException(status_code=422, detail=f"bad range {range_header!r}") from None
            if lo >= len(blob) or hi < lo:
                raise HTTPException(status_code=416, detail="range out of bounds")
            hi = min(hi, len(blob) - 1)
            return Response(
                content=blob[lo : hi + 1],
                status_code=206,
                media_type="audio/wav",
                headers={
                    "Content-Range": f"bytes {lo}-{hi}/{len(blob)}",
                    "Accept-Ranges": "bytes",
                },
            )
        return Response(content=blob, media_type="audio/wav",
                        headers={"Accept-Ranges": "bytes"})

    @app.post("/episodes/{episode_id}/preview")
    def preview(episode_id: str, body: PreviewRequest):
        episode = _episode_or_404(episode_id)
        doc = episode.record.doc
        try:
            check_indices(doc, body.indices)
        except AnnotationValidationError as exc:
            raise HTTPException(status_code=422, detail=exc.reason) from None
        _evict_expired()

        if not body.indices:
            return {
                "episode_id": episode_id,
                "summary_text": "",
                "total_duration_s": 0.0,
                "audio_token": None,
                "valid": False,
                "validity_reason": "empty selection",
            }

        spans = audio_mod.spans_of(doc, Selection(episode_id, list(body.indices)))
        total_s = sum(s.duration_ms for s in spans) / 1000.0
        valid = MIN_SUMMARY_S <= total_s <= MAX_SUMMARY_S
        reason = None
        if total_s < MIN_SUMMARY_S:
            reason = f"below {MIN_SUMMARY_S:.0f}s minimum"
        elif total_s > MAX_SUMMARY_S:
            reason = f"above {MAX_SUMMARY_S:.0f}s maximum"

        token = None
        if episode.audio_path is not None:
            clip = audio_mod.read_audio(episode.audio_path)
            try:
                summary_clip = audio_mod.stitch(clip, spans)
            except audio_mod.SpanError as exc:
                raise HTTPException(status_code=500, detail=f"stitch failed: {exc}") from None
            token = uuid.uuid4().hex
            path = preview_root / f"{token}.wav"
            audio_mod.write_audio(summary_clip, path)
            with previews_lock:
                previews[token] = (path, time.monotonic() + preview_ttl_s)

        return {
            "episode_id": episode_id,
            "summary_text": selection_text(doc, list(body.indices)),
            "total_duration_s": total_s,
            "audio_token": token,
            "valid": valid,
            "validity_reason": reason,
        }

    @app.get("/previews/{token}")
    def fetch_preview(token: str):
        _evict_expired()
        with previews_lock:
            entry = previews.get(token)
        if entry is None:
            raise HTTPException(status_code=404, detail="unknown or expired preview token")
        return Response(content=entry[0].read_bytes(), media_type="audio/wav")

    @app.get("/episodes/{episode_id}/annotation")
    def get_annotation(episode_id: str):
        episode = _episode_or_404(episode_id)
        annotation = episode.record.annotation
        if annotation is None:
            return {"episode_id": episode_id, "annotation": None}
        return {
            "episode_id": episode_id,
            "annotation": {
                "indices": annotation.selected_indices,
                "annotator_id": annotation.annotator_id,
                "created_at": annotation.created_at,
                "revision": annotation.revision,
                "summary_duration_s": annotation.summary_duration_s,
            },
        }

    @app.put("/episodes/{episode_id}/annotation")
    def put_annotation(episode_id: str, body: AnnotationRequest):
        episode = _episode_or_404(episode_id)
        with episode.lock:
            doc = episode.record.doc
            previous = episode.record.annotation
            revision = previous.revision + 1 if previous is not None else 1
            try:
                annotation = make_annotation(
                    doc,
                    list(body.indices),
                    body.annotator_id,
                    created_at=datetime.now(timezone.utc).isoformat(),
                    revision=revision,
                )
            except AnnotationValidationError as exc:
                return JSONResponse(status_code=422, content={"detail": exc.reason})
            episode.record.annotation = annotation
            _persist(episode)
        return {
            "episode_id": episode_id,
            "revision": annotation.revision,
            "summary_duration_s": annotation.summary_duration_s,
        }

    return app
