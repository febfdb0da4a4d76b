// Thin REST client over fetch. All truth lives in the service; this module
// only shapes requests and surfaces typed errors.

import { EntryDraft } from "./validation.js";

export interface DurationHitStatement {
  statement_id: string;
  text: string;
}

export interface DurationHit {
  hit_id: string;
  kind: "duration";
  third_vote: boolean;
  statements: DurationHitStatement[];
  options: { token: string; display: string }[];
}

export interface FollowupHit {
  hit_id: string;
  kind: "followup";
  target: {
    statement_id: string;
    text: string;
    duration_token: string;
    duration_display: string | null;
  };
  options: { token: string; display: string }[];
  classes: string[];
}

export type Hit = DurationHit | FollowupHit;

export interface QueueItem {
  submission_id: string;
  hit_id: string;
  target: { statement_id: string; text: string; duration_token: string };
  entries: EntryDraft[];
  review_state: string;
  annotator: {
    annotator_id: string;
    approved: number;
    rejected: number;
    trusted: boolean;
    approvals_to_trust: number;
  };
}

export interface AnnotatorInfo {
  annotator_id: string;
  approved: number;
  rejected: number;
  trusted: boolean;
  blocked: boolean;
  qualified: boolean;
}

export class ApiError extends Error {
  status: number;
  detail: string[] | string;

  constructor(status: number, detail: string[] | string) {
    super(Array.isArray(detail) ? detail.join("; ") : detail);
    this.status = status;
    this.detail = detail;
  }
}

type FetchLike = typeof fetch;

export class AnnotationApi {
  private baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    // wrap the global to keep its `this` binding intact
    this.fetchFn = fetchFn ?? ((...args) => fetch(...args));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, (payload as { detail?: string[] | string }).detail ?? response.statusText);
    }
    return payload as T;
  }

  async health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  // null when no open HIT is available (404).
  async nextHit(task: "duration" | "followup", annotatorId: string): Promise<Hit | null> {
    try {
      return await this.request<Hit>(
        "GET",
        `/hits/next?task=${task}&annotator=${encodeURIComponent(annotatorId)}`,
      );
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        return null;
      }
      throw error;
    }
  }

  async submitVotes(
    hitId: string, annotatorId: string, votes: Record<string, string>,
  ): Promise<{ recorded: number; resolutions: Record<string, string> }> {
    return this.request("POST", `/hits/${hitId}/votes`, {
      annotator_id: annotatorId,
      votes,
    });
  }

  async submitFollowups(
    hitId: string, annotatorId: string, entries: EntryDraft[],
  ): Promise<{ submission_id: string; queued_for_review: boolean; auto_approved: boolean }> {
    return this.request("POST", `/hits/${hitId}/followups`, {
      annotator_id: annotatorId,
      entries,
    });
  }

  async reviewQueue(): Promise<QueueItem[]> {
    const payload = await this.request<{ queue: QueueItem[] }>("GET", "/review/queue");
    return payload.queue;
  }

  async review(
    submissionId: string,
    reviewerId: string,
    decision: "approve" | "reject" | "edit",
    feedback: string,
    entries?: EntryDraft[],
  ): Promise<QueueItem> {
    return this.request("POST", `/review/${submissionId}`, {
      reviewer_id: reviewerId,
      decision,
      feedback,
      entries: entries ?? null,
    });
  }

  async blockAnnotator(annotatorId: string, reviewerId: string): Promise<AnnotatorInfo> {
    return this.request("POST", `/annotators/${encodeURIComponent(annotatorId)}/block`, {
      reviewer_id: reviewerId,
    });
  }

  async annotator(annotatorId: string): Promise<AnnotatorInfo> {
    return this.request("GET", `/annotators/${encodeURIComponent(annotatorId)}`);
  }

  async addStatements(
    statements: { statement_id: string; text: string }[],
  ): Promise<{ hits_created: string[] }> {
    return this.request("POST", "/statements", { statements });
  }

  async exportDataset(): Promise<{ manifest: Record<string, unknown>; records: Record<string, string>[] }> {
    return this.request("GET", "/export");
  }
}
