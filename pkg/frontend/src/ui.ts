// DOM views for the three-step annotation flow:
// browse episodes -> orient -> select sentences -> preview & submit.

import { AnnotationApi, ApiError } from "./api.js";
import { MAX_SUMMARY_S, MIN_SUMMARY_S, SelectionState } from "./state.js";
import type { EpisodeSummary, SentenceInfo } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function formatDuration(seconds: number): string {
  const mins = Math.floor(seconds / 60);
  const secs = Math.round(seconds % 60);
  return `${mins}:${secs.toString().padStart(2, "0")}`;
}

export class AnnotationApp {
  private readonly api: AnnotationApi;
  private readonly root: HTMLElement;
  private readonly annotatorId: string;
  private state: SelectionState | null = null;
  private episode: EpisodeSummary | null = null;

  constructor(api: AnnotationApi, root: HTMLElement, annotatorId = "annotator") {
    this.api = api;
    this.root = root;
    this.annotatorId = annotatorId;
  }

  async showBrowser(): Promise<void> {
    this.state = null;
    this.episode = null;
    this.root.replaceChildren(el("p", "status", "Loading episodes..."));
    let episodes: EpisodeSummary[] = [];
    try {
      let cursor: string | undefined;
      do {
        const page = await this.api.listEpisodes(cursor);
        episodes = episodes.concat(page.episodes);
        cursor = page.next_cursor ?? undefined;
      } while (cursor);
    } catch (error) {
      this.renderRetryBanner(error, () => this.showBrowser());
      return;
    }

    const container = el("div", "browser");
    container.appendChild(el("h1", undefined, "Episodes"));
    if (episodes.length === 0) {
      container.appendChild(el("p", "empty", "No episodes in the corpus."));
    }
    const list = el("ul", "episode-list");
    for (const episode of episodes) {
      const item = el("li", "episode-row");
      const button = el("button", "episode-open", episode.title || episode.episode_id);
      button.addEventListener("click", () => this.showOrient(episode));
      item.appendChild(button);
      item.appendChild(el("span", "episode-length", formatDuration(episode.duration_s)));
      if (episode.annotated) {
        item.appendChild(el("span", "badge annotated", "annotated"));
      }
      list.appendChild(item);
    }
    container.appendChild(list);
    this.root.replaceChildren(container);
  }

  async showOrient(episode: EpisodeSummary): Promise<void> {
    this.episode = episode;
    const container = el("div", "orient");
    container.appendChild(el("h1", undefined, episode.title || episode.episode_id));
    container.appendChild(
      el("p", "description", episode.description || "(no provider description)"),
    );
    const player = el("audio");
    player.controls = true;
    player.src = this.api.episodeAudioUrl(episode.episode_id);
    container.appendChild(player);

    const next = el("button", "primary", "Start selecting sentences");
    next.addEventListener("click", () => this.showSelect());
    container.appendChild(next);
    const back = el("button", undefined, "Back to episodes");
    back.addEventListener("click", () => this.showBrowser());
    container.appendChild(back);
    this.root.replaceChildren(container);

    try {
      const [sentenceList, stored] = await Promise.all([
        this.api.getSentences(episode.episode_id),
        this.api.getAnnotation(episode.episode_id),
      ]);
      this.state = new SelectionState(episode.episode_id, sentenceList.sentences);
      this.state.restore(stored.annotation);
    } catch (error) {
      this.renderRetryBanner(error, () => this.showOrient(episode));
    }
  }

  showSelect(): void {
    const state = this.state;
    if (!state || !this.episode) return;
    state.beginSelection();

    const container = el("div", "select");
    container.appendChild(el("h1", undefined, `Select summary sentences`));

    const meter = el("div", "meter");
    const hint = el("div", "hint");
    const updateMeter = () => {
      const duration = state.durationS();
      meter.textContent =
        `${duration.toFixed(1)} s selected ` +
        `(must stay within ${MIN_SUMMARY_S}-${MAX_SUMMARY_S} s)`;
      meter.dataset.status = state.meterStatus();
      hint.textContent = state.isContiguous()
        ? ""
        : "Tip: contiguous sentence runs make smoother audio.";
      previewButton.disabled = state.indices().length === 0;
    };

    const rows = el("ol", "sentences");
    for (const sentence of state.sentences) {
      rows.appendChild(this.sentenceRow(sentence, state, updateMeter));
    }

    const previewButton = el("button", "primary", "Preview summary");
    previewButton.addEventListener("click", async () => {
      previewButton.disabled = true;
      try {
        const preview = await this.api.postPreview(state.episodeId, state.indices());
        state.applyPreview(preview);
        this.showReview();
      } catch (error) {
        this.renderError(container, error);
        previewButton.disabled = false;
      }
    });
    const back = el("button", undefined, "Back");
    back.addEventListener("click", () => this.showBrowser());

    container.appendChild(meter);
    container.appendChild(hint);
    container.appendChild(rows);
    container.appendChild(previewButton);
    container.appendChild(back);
    this.root.replaceChildren(container);
    updateMeter();
  }

  private sentenceRow(
    sentence: SentenceInfo,
    state: SelectionState,
    onChange: () => void,
  ): HTMLLIElement {
    const row = el("li", "sentence-row");
    const checkbox = el("input") as HTMLInputElement;
    checkbox.type = "checkbox";
    checkbox.checked = state.isChosen(sentence.index);
    checkbox.addEventListener("change", () => {
      state.toggle(sentence.index);
      onChange();
    });
    row.appendChild(checkbox);

    const play = el("button", "play", "play");
    play.addEventListener("click", () => {
      const audio = new Audio(
        this.api.sentenceAudioUrl(state.episodeId, sentence.start_s, sentence.end_s),
      );
      audio.play().catch(() => this.renderError(row, new Error("audio fetch failed")));
    });
    row.appendChild(play);
    row.appendChild(el("span", "text", sentence.text));
    row.appendChild(el("span", "times", `${sentence.duration_s.toFixed(1)} s`));
    return row;
  }

  showReview(): void {
    const state = this.state;
    const preview = state?.currentPreview();
    if (!state || !preview) return;

    const container = el("div", "review");
    container.appendChild(el("h1", undefined, "Preview & submit"));
    container.appendChild(el("p", "summary-text", preview.summary_text));
    container.appendChild(
      el("p", "duration", `Summary length: ${preview.total_duration_s.toFixed(1)} s`),
    );
    if (!preview.valid && preview.validity_reason) {
      container.appendChild(el("p", "invalid", preview.validity_reason));
    }
    if (preview.audio_token) {
      const player = el("audio");
      player.controls = true;
      player.src = this.api.previewAudioUrl(preview.audio_token);
      container.appendChild(player);
    }

    const submit = el("button", "primary", "Submit annotation");
    submit.disabled = !state.canSubmit();
    submit.addEventListener("click", async () => {
      submit.disabled = true;
      try {
        const stored = await this.api.putAnnotation(
          state.episodeId,
          state.indices(),
          this.annotatorId,
        );
        this.root.replaceChildren(
          el("p", "status", `Saved revision ${stored.revision}.`),
        );
        await this.showBrowser();
      } catch (error) {
        this.renderError(container, error);
        submit.disabled = !state.canSubmit();
      }
    });
    const revise = el("button", undefined, "Revise selection");
    revise.addEventListener("click", () => this.showSelect());

    container.appendChild(submit);
    container.appendChild(revise);
    this.root.replaceChildren(container);
  }

  private renderError(parent: HTMLElement, error: unknown): void {
    const previous = parent.querySelector(".error");
    if (previous) previous.remove();
    const message =
      error instanceof ApiError ? error.detail : `backend unreachable: ${error}`;
    parent.appendChild(el("p", "error", message));
  }

  private renderRetryBanner(error: unknown, retry: () => void): void {
    const banner = el("div", "retry-banner");
    const message =
      error instanceof ApiError ? error.detail : "Cannot reach the annotation backend.";
    banner.appendChild(el("p", "error", message));
    const button = el("button", "primary", "Retry");
    button.addEventListener("click", retry);
    banner.appendChild(button);
    this.root.replaceChildren(banner);
  }
}
