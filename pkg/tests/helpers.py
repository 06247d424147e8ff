"""Shared builders for tests: tokens, docs, and a tiny mock HTTP server."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from podbrief.segmenter import Sentence, SentenceDoc
from podbrief.transcript import PRONUNCIATION, PUNCTUATION, Transcript, WordToken


def word(content, start_s, end_s, conf=0.99):
    return WordToken(
        content,
        PRONUNCIATION,
        int(round(start_s * 1000)),
        int(round(end_s * 1000)),
        conf,
    )


def punct(content, conf=0.95):
    return WordToken(content, PUNCTUATION, confidence=conf)


def make_transcript(tokens, episode_id="ep1", audio_ref="ep1.wav"):
    last_end = max((t.end_ms for t in tokens if t.is_word()), default=0)
    return Transcript(episode_id, list(tokens), audio_ref, last_end)


def asr_word(content, start, end, conf="0.99"):
    return {
        "type": "pronunciation",
        "alternatives": [{"content": content, "confidence": conf}],
        "start_time": str(start),
        "end_time": str(end),
    }


def asr_punct(content, conf="0.95"):
    return {"type": "punctuation", "alternatives": [{"content": content, "confidence": conf}]}


def asr_doc(items):
    return {"results": {"items": items}}


def make_doc(texts_and_times, episode_id="ep1", audio_ref="ep1.wav"):
    """SentenceDoc from (text, start_s, end_s) triples."""
    sentences = [
        Sentence(i, text, int(round(s * 1000)), int(round(e * 1000)))
        for i, (text, s, e) in enumerate(texts_and_times)
    ]
    duration = sentences[-1].end_ms if sentences else 0
    return SentenceDoc(episode_id, sentences, audio_ref, duration)


class MockHttpServer:
    """Serves canned responses; routes maps (method, path) -> (status, body).

    Body may be a dict (sent as JSON) or raw bytes. Started on an ephemeral
    port; use as a context manager.
    """

    def __init__(self, routes):
        server = self

        class Handler(BaseHTTPRequestHandler):
            def _respond(self):
                server.requests.append((self.command, self.path))
                entry = server.routes.get((self.command, self.path))
                if entry is None:
                    self.send_response(404)
                    self.end_headers()
                    return
                status, body = entry
                if isinstance(body, dict):
                    body = json.dumps(body).encode()
                self.send_response(status)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                self._respond()

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                self.rfile.read(length)
                self._respond()

            def log_message(self, *args):
                pass

        self.routes = routes
        self.requests = []
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self._httpd.server_port}"

    def __enter__(self):
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._httpd.shutdown()
        self._httpd.server_close()
