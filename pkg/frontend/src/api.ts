// Typed client for the annotation backend. All state lives on the server;
// this module only moves JSON back and forth.

import type {
  AnnotationEnvelope,
  EpisodePage,
  PreviewResponse,
  PutAnnotationResponse,
  SentenceList,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") {
      detail = body.detail;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class AnnotationApi {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
  }

  async listEpisodes(cursor?: string): Promise<EpisodePage> {
    const query = cursor ? `?cursor=${encodeURIComponent(cursor)}` : "";
    const response = await this.fetchImpl(`${this.baseUrl}/episodes${query}`);
    return parseOrThrow<EpisodePage>(response);
  }

  async getSentences(episodeId: string): Promise<SentenceList> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/episodes/${encodeURIComponent(episodeId)}/sentences`,
    );
    return parseOrThrow<SentenceList>(response);
  }

  async getAnnotation(episodeId: string): Promise<AnnotationEnvelope> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/episodes/${encodeURIComponent(episodeId)}/annotation`,
    );
    return parseOrThrow<AnnotationEnvelope>(response);
  }

  async postPreview(episodeId: string, indices: number[]): Promise<PreviewResponse> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/episodes/${encodeURIComponent(episodeId)}/preview`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ indices }),
      },
    );
    return parseOrThrow<PreviewResponse>(response);
  }

  async putAnnotation(
    episodeId: string,
    indices: number[],
    annotatorId: string,
  ): Promise<PutAnnotationResponse> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/episodes/${encodeURIComponent(episodeId)}/annotation`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ indices, annotator_id: annotatorId }),
      },
    );
    return parseOrThrow<PutAnnotationResponse>(response);
  }

  episodeAudioUrl(episodeId: string): string {
    return `${this.baseUrl}/episodes/${encodeURIComponent(episodeId)}/audio`;
  }

  sentenceAudioUrl(episodeId: string, startS: number, endS: number): string {
    return `${this.episodeAudioUrl(episodeId)}?start_s=${startS}&end_s=${endS}`;
  }

  previewAudioUrl(token: string): string {
    return `${this.baseUrl}/previews/${encodeURIComponent(token)}`;
  }
}
