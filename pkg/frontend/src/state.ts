// Client-side mirror of one annotation session. The duration meter gives
// instant feedback, but nothing here is authoritative: submission is gated
// on the server's own validity verdict carried by the latest preview.

import type { PreviewResponse, SentenceInfo, StoredAnnotation } from "./types.js";

export const MIN_SUMMARY_S = 30;
export const MAX_SUMMARY_S = 120;

export type ProtocolStep = "orient" | "select" | "review";

export type MeterStatus = "empty" | "short" | "ok" | "long";

export class SelectionState {
  readonly episodeId: string;
  readonly sentences: SentenceInfo[];
  step: ProtocolStep = "orient";
  private chosen = new Set<number>();
  private preview: PreviewResponse | null = null;

  constructor(episodeId: string, sentences: SentenceInfo[]) {
    this.episodeId = episodeId;
    this.sentences = sentences;
  }

  /** Seed the selection from the server's persisted annotation. */
  restore(annotation: StoredAnnotation | null): void {
    this.chosen = new Set(annotation ? annotation.indices : []);
    this.preview = null;
  }

  beginSelection(): void {
    this.step = "select";
  }

  indices(): number[] {
    return [...this.chosen].sort((a, b) => a - b);
  }

  isChosen(index: number): boolean {
    return this.chosen.has(index);
  }

  /** Toggle one sentence. Any change invalidates the current preview, so a
   * stale preview can never be played or submitted. */
  toggle(index: number): void {
    if (index < 0 || index >= this.sentences.length) {
      throw new RangeError(`sentence index ${index} out of range`);
    }
    if (this.chosen.has(index)) {
      this.chosen.delete(index);
    } else {
      this.chosen.add(index);
    }
    this.preview = null;
    if (this.chosen.size === 0) {
      this.step = "select";
    } else if (this.step === "review") {
      this.step = "select";
    }
  }

  clear(): void {
    this.chosen.clear();
    this.preview = null;
    this.step = "select";
  }

  /** Client-side duration meter: sum of the chosen sentences' durations. */
  durationS(): number {
    let total = 0;
    for (const index of this.chosen) {
      total += this.sentences[index].duration_s;
    }
    return total;
  }

  meterStatus(): MeterStatus {
    const duration = this.durationS();
    if (this.chosen.size === 0) return "empty";
    if (duration < MIN_SUMMARY_S) return "short";
    if (duration > MAX_SUMMARY_S) return "long";
    return "ok";
  }

  /** Advisory only: annotators are asked for contiguous runs where possible,
   * but non-contiguous selections are never blocked. */
  isContiguous(): boolean {
    const sorted = this.indices();
    for (let i = 1; i < sorted.length; i++) {
      if (sorted[i] !== sorted[i - 1] + 1) return false;
    }
    return true;
  }

  /** Record the server's verdict for the current selection. */
  applyPreview(preview: PreviewResponse): void {
    this.preview = preview;
    this.step = "review";
  }

  currentPreview(): PreviewResponse | null {
    return this.preview;
  }

  previewIsFresh(): boolean {
    return this.preview !== null;
  }

  /** Submission is enabled iff the server said the current selection is
   * valid; the client meter alone never enables it. */
  canSubmit(): boolean {
    return this.preview !== null && this.preview.valid;
  }
}
