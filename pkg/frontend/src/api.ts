/** Typed client for the review service HTTP API. */

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface QueueItem {
  record_id: string;
  flags: string[];
  thumbnail_url: string;
}

export interface QueuePage {
  total: number;
  offset: number;
  limit: number;
  items: QueueItem[];
}

export interface MaskPayload {
  height: number;
  width: number;
  counts: number[];
}

export interface FlagPayload {
  kind: string;
  detail: string;
  metric?: number;
}

export interface RecordPayload {
  record_id: string;
  class_id: number;
  class_name: string;
  split: string;
  source_path: string;
  fg_path: string | null;
  detection: { box: Box; score: number; label: string } | null;
  mask: MaskPayload | null;
  flags: FlagPayload[];
  review: string;
}

export interface RecordView {
  record: RecordPayload;
  width: number;
  height: number;
  image_url: string;
  fg_url?: string;
}

export interface StatsPayload {
  dataset: string;
  total: number;
  flagged: number;
  flag_rate: number;
  queue_depth: number;
  flag_counts: Record<string, number>;
  review_counts: Record<string, number>;
}

export type DecisionAction = 'accept' | 'reject' | 'reprompt';

export interface DecisionBody {
  action: DecisionAction;
  manual_box?: Box;
  reviewer?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson(resp: Response): Promise<any> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && body.detail) detail = String(body.detail);
    } catch {
      /* keep statusText */
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json();
}

export class ReviewApi {
  constructor(private base: string = '') {}

  async queue(offset = 0, limit = 20): Promise<QueuePage> {
    return asJson(await fetch(`${this.base}/api/queue?offset=${offset}&limit=${limit}`));
  }

  async record(recordId: string): Promise<RecordView> {
    return asJson(await fetch(`${this.base}/api/record/${recordId}`));
  }

  async decide(recordId: string, body: DecisionBody): Promise<RecordView> {
    return asJson(
      await fetch(`${this.base}/api/record/${recordId}/decision`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(body),
      }),
    );
  }

  async stats(): Promise<StatsPayload> {
    return asJson(await fetch(`${this.base}/api/stats`));
  }
}
