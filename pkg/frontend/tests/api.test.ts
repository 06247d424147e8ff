import { describe, expect, it, vi } from "vitest";

import { AnnotationApi, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("AnnotationApi", () => {
  it("lists episodes and follows the cursor parameter", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ episodes: [], next_cursor: null }));
    const api = new AnnotationApi("http://backend:9/", fetchMock);
    await api.listEpisodes();
    expect(fetchMock).toHaveBeenCalledWith("http://backend:9/episodes");
    await api.listEpisodes("50");
    expect(fetchMock).toHaveBeenCalledWith("http://backend:9/episodes?cursor=50");
  });

  it("posts previews with the selection payload", async () => {
    const body = {
      episode_id: "ep",
      summary_text: "text",
      total_duration_s: 60,
      audio_token: "t",
      valid: true,
      validity_reason: null,
    };
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(body));
    const api = new AnnotationApi("http://b", fetchMock);
    const preview = await api.postPreview("ep", [1, 2, 3]);
    expect(preview.valid).toBe(true);
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("http://b/episodes/ep/preview");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body)).toEqual({ indices: [1, 2, 3] });
  });

  it("puts annotations with the annotator id", async () => {
    const fetchMock = vi.fn().mockResolvedValue(
      jsonResponse({ episode_id: "ep", revision: 1, summary_duration_s: 60 }),
    );
    const api = new AnnotationApi("http://b", fetchMock);
    const stored = await api.putAnnotation("ep", [1, 2], "alice");
    expect(stored.revision).toBe(1);
    const [, init] = fetchMock.mock.calls[0];
    expect(JSON.parse(init.body)).toEqual({ indices: [1, 2], annotator_id: "alice" });
  });

  it("surfaces server rejections verbatim as ApiError", async () => {
    const fetchMock = vi.fn().mockResolvedValue(
      jsonResponse({ detail: "below 30s minimum (selection is 10.0s)" }, 422),
    );
    const api = new AnnotationApi("http://b", fetchMock);
    const failure = await api.putAnnotation("ep", [0], "alice").catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.status).toBe(422);
    expect(failure.detail).toContain("below 30s minimum");
  });

  it("propagates network failures", async () => {
    const fetchMock = vi.fn().mockRejectedValue(new TypeError("fetch failed"));
    const api = new AnnotationApi("http://b", fetchMock);
    await expect(api.listEpisodes()).rejects.toThrow("fetch failed");
  });

  it("builds audio urls", () => {
    const api = new AnnotationApi("http://b/");
    expect(api.episodeAudioUrl("ep one")).toBe("http://b/episodes/ep%20one/audio");
    expect(api.sentenceAudioUrl("ep", 1.5, 4)).toBe(
      "http://b/episodes/ep/audio?start_s=1.5&end_s=4",
    );
    expect(api.previewAudioUrl("tok")).toBe("http://b/previews/tok");
  });
});

// Round-trip against a live fixture backend when one is provided, e.g.
//   podbrief fixtures --out corpus.jsonl ... && podbrief serve-annotation corpus.jsonl
//   PODBRIEF_BACKEND=http://127.0.0.1:8077 npm test
const backend = process.env.PODBRIEF_BACKEND;

describe.skipIf(!backend)("live backend round trip", () => {
  it("previews and submits a valid selection", async () => {
    const api = new AnnotationApi(backend!);
    const page = await api.listEpisodes();
    expect(page.episodes.length).toBeGreaterThan(0);
    const episodeId = page.episodes[0].episode_id;
    const { sentences } = await api.getSentences(episodeId);

    const chosen: number[] = [];
    let duration = 0;
    for (const sentence of sentences) {
      if (duration >= 60) break;
      chosen.push(sentence.index);
      duration += sentence.duration_s;
    }
    const preview = await api.postPreview(episodeId, chosen);
    expect(preview.valid).toBe(true);

    const stored = await api.putAnnotation(episodeId, chosen, "ui-test");
    expect(stored.revision).toBeGreaterThanOrEqual(1);
    const restored = await api.getAnnotation(episodeId);
    expect(restored.annotation?.indices).toEqual(chosen);
  });
});
