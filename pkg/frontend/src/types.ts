// Payload shapes of the annotation backend's JSON API.

export interface EpisodeSummary {
  episode_id: string;
  title: string;
  description: string;
  duration_s: number;
  annotated: boolean;
}

export interface EpisodePage {
  episodes: EpisodeSummary[];
  next_cursor: string | null;
}

export interface SentenceAudioLocator {
  url: string;
  byte_range: string;
  query: string;
}

export interface SentenceInfo {
  index: number;
  text: string;
  start_s: number;
  end_s: number;
  duration_s: number;
  audio: SentenceAudioLocator | null;
}

export interface SentenceList {
  episode_id: string;
  sentences: SentenceInfo[];
}

export interface PreviewResponse {
  episode_id: string;
  summary_text: string;
  total_duration_s: number;
  audio_token: string | null;
  valid: boolean;
  validity_reason: string | null;
}

export interface StoredAnnotation {
  indices: number[];
  annotator_id: string;
  created_at: string;
  revision: number;
  summary_duration_s: number;
}

export interface AnnotationEnvelope {
  episode_id: string;
  annotation: StoredAnnotation | null;
}

export interface PutAnnotationResponse {
  episode_id: string;
  revision: number;
  summary_duration_s: number;
}
