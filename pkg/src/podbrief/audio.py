"""Slice and concatenate 16-bit PCM WAV audio by sentence spans.

Stitching is a pure sample-copy: no resampling, no gain change. Cuts are
hard by default; a short linear crossfade is available behind a flag.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .segmenter import SentenceDoc
from .summarizer import Selection

# Adjacent selected sentences closer than this play as one span, avoiding
# audible micro-cuts between consecutive picks.
SPAN_MERGE_GAP_MS = 50


class AudioError(RuntimeError):
    """Base class for audio processing failures."""


class UnsupportedEncodingError(AudioError):
    """The file is not 16-bit PCM WAV."""


class TruncatedFileError(AudioError):
    """The WAV payload is shorter than its header declares."""


class SpanError(AudioError):
    """A span refers outside the clip or the sentence list."""


@dataclass(eq=False)
class AudioClip:
    """PCM audio as an int16 array of shape (frames, channels)."""

    sample_rate: int
    channels: int
    samples: np.ndarray

    @property
    def frames(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return self.frames / self.sample_rate


@dataclass(frozen=True)
class Span:
    """A half-open slice of the source audio, in milliseconds."""

    start_ms: int
    end_ms: int

    @property
    def start_s(self) -> float:
        return self.start_ms / 1000.0

    @property
    def end_s(self) -> float:
        return self.end_ms / 1000.0

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


def spans_of(
    doc: SentenceDoc,
    selection: Selection,
    merge_gap_ms: int = SPAN_MERGE_GAP_MS,
) -> list[Span]:
    """Audio spans of the selected sentences, in index order.

    Selected sentences separated by less than ``merge_gap_ms`` of audio are
    merged into a single span.
    """
    spans: list[Span] = []
    for index in selection.indices:
        if not 0 <= index < len(doc):
            raise SpanError(
                f"sentence index {index} out of range for episode "
                f"{doc.episode_id!r} with {len(doc)} sentences"
            )
        sentence = doc.sentences[index]
        if spans and sentence.start_ms - spans[-1].end_ms < merge_gap_ms:
            spans[-1] = Span(spans[-1].start_ms, sentence.end_ms)
        else:
            spans.append(Span(sentence.start_ms, sentence.end_ms))
    return spans


def ms_to_sample(ms: int, rate: int) -> int:
    # round half away from zero; ms is never negative here
    return (ms * rate + 500) // 1000


def stitch(clip: AudioClip, spans: list[Span], crossfade_ms: int = 0) -> AudioClip:
    """Concatenate the sample ranges of ``spans`` into a new clip.

    Sample boundaries are rounded half away from zero on each span end
    independently, so the output frame count is exactly the sum of per-span
    frame counts. A span reaching past the clip is an error, never clamped.
    With ``crossfade_ms`` > 0 consecutive pieces overlap by a linear fade.
    """
    pieces = []
    for span in spans:
        if span.start_ms < 0 or span.start_ms > span.end_ms:
            raise SpanError(f"invalid span {span.start_s}-{span.end_s} s")
        lo = ms_to_sample(span.start_ms, clip.sample_rate)
        hi = ms_to_sample(span.end_ms, clip.sample_rate)
        if hi > clip.frames:
            raise SpanError(
                f"span {span.start_s}-{span.end_s} s ends past the clip "
                f"({clip.duration_s} s)"
            )
        pieces.append(clip.samples[lo:hi])

    if not pieces:
        samples = np.zeros((0, clip.channels), dtype=np.int16)
    elif crossfade_ms > 0 and len(pieces) > 1:
        samples = _crossfade_concat(pieces, crossfade_ms, clip.sample_rate)
    else:
        samples = np.concatenate(pieces, axis=0)
    return AudioClip(clip.sample_rate, clip.channels, samples)


def _crossfade_concat(pieces: list[np.ndarray], fade_ms: int, rate: int) -> np.ndarray:
    out = pieces[0].astype(np.float64)
    for piece in pieces[1:]:
        nxt = piece.astype(np.float64)
        fade = min(ms_to_sample(fade_ms, rate), len(out), len(nxt))
        if fade == 0:
            out = np.concatenate([out, nxt], axis=0)
            continue
        ramp = np.linspace(0.0, 1.0, fade, endpoint=False)[:, None]
        blended = out[-fade:] * (1.0 - ramp) + nxt[:fade] * ramp
        out = np.concatenate([out[:-fade], blended, nxt[fade:]], axis=0)
    return np.clip(np.rint(out), -32768, 32767).astype(np.int16)


def read_audio(path: str | Path) -> AudioClip:
    """Read a 16-bit PCM WAV file; mono or stereo, any sample rate."""
    try:
        with wave.open(str(path), "rb") as wav:
            channels = wav.getnchannels()
            rate = wav.getframerate()
            sampwidth = wav.getsampwidth()
            comptype = wav.getcomptype()
            frames = wav.getnframes()
            if comptype != "NONE" or sampwidth != 2:
                raise UnsupportedEncodingError(
                    f"{path}: only 16-bit PCM is supported "
                    f"(got {sampwidth * 8}-bit, compression {comptype!r})"
                )
            payload = wav.readframes(frames)
    except wave.Error as exc:
        raise UnsupportedEncodingError(f"{path}: {exc}") from None
    except EOFError:
        raise TruncatedFileError(f"{path}: file ends inside the header") from None

    expected = frames * channels * 2
    if len(payload) != expected:
        raise TruncatedFileError(
            f"{path}: header declares {frames} frames ({expected} bytes) "
            f"but payload has {len(payload)} bytes"
        )
    samples = np.frombuffer(payload, dtype="<i2").reshape(-1, channels)
    return AudioClip(rate, channels, samples)


def write_audio(clip: AudioClip, path: str | Path) -> None:
    """Write a clip as 16-bit PCM WAV, bit-exact with what read_audio loads."""
    samples = np.ascontiguousarray(clip.samples, dtype="<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(clip.channels)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(samples.tobytes())
