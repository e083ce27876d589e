/**
 * Queue state machine for the curation flow. Framework-free so the whole
 * review loop is testable without a DOM.
 *
 * Decisions advance the queue optimistically, then a stats refetch
 * reconciles: displayed counters always come from the last GET /stats
 * response, and a mismatch with the optimistic expectation is surfaced as
 * a visible note. A failed submission raises a retry banner and never
 * discards the edit buffer.
 */

import { ApiError, ReviewApi } from "./api.js";
import type {
  DecisionAction,
  QueueStats,
  SampleRecord,
  TaskName,
} from "./types.js";

export interface QueueEntry {
  record: SampleRecord;
  decided: DecisionAction | null;
}

export interface Banner {
  message: string;
  retry: (() => Promise<void>) | null;
}

const STATS_KEY: Record<DecisionAction, keyof QueueStats> = {
  Accept: "accepted",
  Reject: "rejected",
  Edit: "edited",
};

export class QueueController {
  entries: QueueEntry[] = [];
  position = 0;
  stats: QueueStats | null = null;
  filter: TaskName | null = null;
  editorOpen = false;
  editBuffer = "";
  editBufferFor: string | null = null;
  banner: Banner | null = null;
  reconcileNote: string | null = null;
  needsToken = false;
  exhausted = false;

  private listeners: Array<() => void> = [];

  constructor(
    private readonly api: ReviewApi,
    public reviewer: string = "curator",
  ) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  current(): QueueEntry | null {
    return this.entries[this.position] ?? null;
  }

  remaining(): number {
    return this.entries.filter((e) => e.decided === null).length;
  }

  isDone(): boolean {
    return this.exhausted && this.remaining() === 0;
  }

  async load(filter: TaskName | null = null): Promise<void> {
    this.filter = filter;
    this.entries = [];
    this.position = 0;
    this.exhausted = false;
    try {
      this.stats = await this.api.stats();
      const page = await this.api.listPending(filter);
      this.entries = page.items.map((record) => ({ record, decided: null }));
      this.exhausted = this.entries.length >= page.total;
      this.needsToken = false;
      this.banner = null;
    } catch (err) {
      this.handleFailure(err, () => this.load(filter));
    }
    this.notify();
  }

  accept(): Promise<void> {
    return this.decide("Accept");
  }

  reject(): Promise<void> {
    return this.decide("Reject");
  }

  openEditor(): void {
    const entry = this.current();
    if (!entry) return;
    this.editorOpen = true;
    if (this.editBufferFor !== entry.record.id) {
      this.editBuffer = entry.record.output;
      this.editBufferFor = entry.record.id;
    }
    this.notify();
  }

  closeEditor(): void {
    // buffer intentionally kept; reopening the same sample restores it
    this.editorOpen = false;
    this.notify();
  }

  setEditBuffer(text: string): void {
    this.editBuffer = text;
    const entry = this.current();
    this.editBufferFor = entry ? entry.record.id : null;
  }

  submitEdit(): Promise<void> {
    return this.decide("Edit", this.editBuffer);
  }

  async decide(action: DecisionAction, editedOutput?: string): Promise<void> {
    const entry = this.current();
    if (!entry) return;
    const expected = this.optimisticStats(entry, action);
    try {
      await this.api.submitDecision({
        sample_id: entry.record.id,
        action,
        edited_output: editedOutput,
        reviewer: this.reviewer,
      });
    } catch (err) {
      if (err instanceof ApiError && err.code === "not_found") {
        // decided or removed elsewhere: skip forward, nothing to retry
        entry.decided = action;
        this.banner = { message: "Sample was already handled elsewhere; skipping.", retry: null };
        this.advance();
        await this.refreshStats(null);
        this.notify();
        return;
      }
      this.handleFailure(err, () => this.decide(action, editedOutput));
      this.notify();
      return;
    }
    entry.decided = action;
    this.banner = null;
    if (action === "Edit") {
      this.editorOpen = false;
      this.editBuffer = "";
      this.editBufferFor = null;
    }
    this.advance();
    await this.refreshStats(expected);
    await this.replenish();
    this.notify();
  }

  next(): void {
    if (this.position < this.entries.length - 1) {
      this.position += 1;
      this.editorOpen = false;
      this.notify();
    }
  }

  previous(): void {
    if (this.position > 0) {
      this.position -= 1;
      this.editorOpen = false;
      this.notify();
    }
  }

  private advance(): void {
    for (let i = this.position; i < this.entries.length; i++) {
      if (this.entries[i].decided === null) {
        this.position = i;
        return;
      }
    }
    this.position = this.entries.length > 0 ? this.entries.length - 1 : 0;
  }

  private optimisticStats(
    entry: QueueEntry,
    action: DecisionAction,
  ): QueueStats | null {
    if (!this.stats) return null;
    const expected = { ...this.stats };
    const previous = entry.decided;
    if (previous === null) {
      expected.pending -= 1;
    } else {
      expected[STATS_KEY[previous]] -= 1;
    }
    expected[STATS_KEY[action]] += 1;
    return expected;
  }

  private async refreshStats(expected: QueueStats | null): Promise<void> {
    try {
      const fresh = await this.api.stats();
      this.reconcileNote =
        expected && !statsEqual(fresh, expected)
          ? "Counts changed on the server; showing server values."
          : null;
      this.stats = fresh;
    } catch (err) {
      this.handleFailure(err, null);
    }
  }

  private async replenish(): Promise<void> {
    if (this.remaining() > 0) return;
    try {
      const page = await this.api.listPending(this.filter);
      const known = new Set(this.entries.map((e) => e.record.id));
      const fresh = page.items.filter((item) => !known.has(item.id));
      if (fresh.length === 0) {
        this.exhausted = true;
        return;
      }
      this.entries.push(...fresh.map((record) => ({ record, decided: null })));
      this.advance();
    } catch (err) {
      this.handleFailure(err, null);
    }
  }

  private handleFailure(err: unknown, retry: (() => Promise<void>) | null): void {
    if (err instanceof ApiError && err.status === 401) {
      this.needsToken = true;
      this.banner = { message: "Authentication required.", retry: null };
      return;
    }
    const message = err instanceof Error ? err.message : String(err);
    this.banner = { message, retry };
  }
}

function statsEqual(a: QueueStats, b: QueueStats): boolean {
  return (
    a.pending === b.pending &&
    a.accepted === b.accepted &&
    a.edited === b.edited &&
    a.rejected === b.rejected
  );
}
