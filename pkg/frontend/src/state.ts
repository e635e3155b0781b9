/** Review session view model: queue paging, the open record, decision
 * submission with conflict handling. Framework-free so the whole flow is
 * testable against a live service without a browser. */

import { ApiError, ReviewApi } from './api.js';
import type { Box, DecisionAction, QueuePage, RecordView } from './api.js';
import { decodeRle } from './rle.js';

export interface SubmitOutcome {
  ok: boolean;
  conflict: boolean;
  view: RecordView | null;
  message: string;
}

export class ReviewSession {
  queue: QueuePage | null = null;
  current: RecordView | null = null;
  reviewer: string;

  constructor(
    private api: ReviewApi,
    reviewer = 'reviewer',
  ) {
    this.reviewer = reviewer;
  }

  /** Queue page straight from the service; items keep the server's order. */
  async refreshQueue(offset = 0, limit = 20): Promise<QueuePage> {
    this.queue = await this.api.queue(offset, limit);
    return this.queue;
  }

  async open(recordId: string): Promise<RecordView> {
    this.current = await this.api.record(recordId);
    return this.current;
  }

  /** First pending item after the current record, wrapping to the start. */
  nextPendingId(): string | null {
    if (!this.queue || this.queue.items.length === 0) return null;
    const items = this.queue.items;
    if (!this.current) return items[0].record_id;
    const at = items.findIndex((it) => it.record_id === this.current!.record.record_id);
    const next = items[(at + 1) % items.length];
    return next ? next.record_id : null;
  }

  /** Decoded 0/1 mask of the open record, row-major, or null. */
  decodedMask(): Uint8Array | null {
    const mask = this.current?.record.mask;
    if (!mask) return null;
    return decodeRle(mask.counts, mask.height, mask.width);
  }

  /**
   * Submit a decision for the open record. A 409 means another decision
   * already landed: the record and queue are refreshed and the outcome is
   * flagged as a conflict rather than thrown.
   */
  async submit(action: DecisionAction, manualBox?: Box): Promise<SubmitOutcome> {
    if (!this.current) {
      return { ok: false, conflict: false, view: null, message: 'no record open' };
    }
    const recordId = this.current.record.record_id;
    try {
      const view = await this.api.decide(recordId, {
        action,
        manual_box: manualBox,
        reviewer: this.reviewer,
      });
      this.current = view;
      await this.refreshQueue(this.queue?.offset ?? 0, this.queue?.limit ?? 20);
      return { ok: true, conflict: false, view, message: `${action} applied` };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.current = await this.api.record(recordId);
        await this.refreshQueue(this.queue?.offset ?? 0, this.queue?.limit ?? 20);
        return { ok: false, conflict: true, view: this.current, message: 'already decided' };
      }
      throw err;
    }
  }
}
