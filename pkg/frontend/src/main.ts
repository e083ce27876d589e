/**
 * DOM wiring for the review queue. All state lives in QueueController;
 * this file only renders it and forwards events.
 */

import { ReviewApi } from "./api.js";
import { attachKeyboard } from "./keyboard.js";
import { QueueController } from "./queue.js";
import type { TaskName } from "./types.js";

const TOKEN_KEY = "forge-review-token";
const REVIEWER_KEY = "forge-reviewer";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function serverBase(): string {
  const override = new URLSearchParams(window.location.search).get("server");
  return override ?? window.location.origin;
}

function taskFilter(): TaskName | null {
  const raw = new URLSearchParams(window.location.search).get("task");
  return (raw as TaskName) || null;
}

function render(queue: QueueController): void {
  const stats = queue.stats;
  el("stat-pending").textContent = stats ? String(stats.pending) : "–";
  el("stat-accepted").textContent = stats ? String(stats.accepted) : "–";
  el("stat-edited").textContent = stats ? String(stats.edited) : "–";
  el("stat-rejected").textContent = stats ? String(stats.rejected) : "–";

  const note = el("reconcile-note");
  note.textContent = queue.reconcileNote ?? "";
  note.hidden = !queue.reconcileNote;

  const banner = el("banner");
  const retryButton = el<HTMLButtonElement>("banner-retry");
  if (queue.banner) {
    banner.hidden = false;
    el("banner-message").textContent = queue.banner.message;
    retryButton.hidden = queue.banner.retry === null;
  } else {
    banner.hidden = true;
  }

  el("token-form").hidden = !queue.needsToken;

  const entry = queue.current();
  const card = el("card");
  const empty = el("empty-state");
  if (!entry) {
    card.hidden = true;
    empty.hidden = false;
    empty.textContent = queue.isDone()
      ? "Queue empty. Every sample is reviewed."
      : "Loading…";
    return;
  }
  card.hidden = false;
  empty.hidden = true;

  el("position").textContent = `${queue.position + 1} / ${queue.entries.length}`;
  el("sample-id").textContent = entry.record.id;
  el("sample-task").textContent = entry.record.task;
  el("decided-state").textContent = entry.decided ? `decided: ${entry.decided}` : "";
  el("instruction").textContent = entry.record.instruction;

  const contextBlock = el("context-block");
  contextBlock.hidden = !entry.record.context;
  el("context").textContent = entry.record.context ?? "";

  const snippetBlock = el("snippet-block");
  snippetBlock.hidden = !entry.record.source_snippet;
  el("snippet").textContent = entry.record.source_snippet ?? "";

  el("output").textContent = entry.record.output;

  const editor = el("editor");
  editor.hidden = !queue.editorOpen;
  const textarea = el<HTMLTextAreaElement>("edit-buffer");
  if (queue.editorOpen && textarea.value !== queue.editBuffer) {
    textarea.value = queue.editBuffer;
  }
}

function main(): void {
  const api = new ReviewApi(serverBase(), localStorage.getItem(TOKEN_KEY));
  const reviewer = localStorage.getItem(REVIEWER_KEY) ?? "curator";
  const queue = new QueueController(api, reviewer);
  queue.onChange(() => render(queue));

  el("accept").addEventListener("click", () => void queue.accept());
  el("reject").addEventListener("click", () => void queue.reject());
  el("edit").addEventListener("click", () => queue.openEditor());
  el("next").addEventListener("click", () => queue.next());
  el("previous").addEventListener("click", () => queue.previous());
  el("banner-retry").addEventListener("click", () => {
    const retry = queue.banner?.retry;
    if (retry) void retry();
  });
  el<HTMLTextAreaElement>("edit-buffer").addEventListener("input", (event) => {
    queue.setEditBuffer((event.target as HTMLTextAreaElement).value);
  });
  el("edit-submit").addEventListener("click", () => void queue.submitEdit());
  el("edit-cancel").addEventListener("click", () => queue.closeEditor());
  el("token-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const token = el<HTMLInputElement>("token-input").value.trim();
    localStorage.setItem(TOKEN_KEY, token);
    api.setToken(token);
    queue.needsToken = false;
    void queue.load(taskFilter());
  });

  attachKeyboard(queue, window);
  void queue.load(taskFilter());
}

main();
