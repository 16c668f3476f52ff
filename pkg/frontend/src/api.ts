/** Thin typed client over the review service JSON API. */

import type { Bit, Criterion } from "./score.js";

export interface RecordSummary {
  id: string;
  service: string;
  resource: string;
  control_type: string;
  status: string;
  created_at: string;
  updated_at: string;
  prescreen: Record<string, Bit | null>;
  score: number | null;
  findings_count: number;
}

export interface CriterionValue {
  value: Bit | null;
  provenance: "Machine" | "Human" | "Unset";
}

export interface RecordDetail extends Omit<RecordSummary, "prescreen" | "findings_count"> {
  prompt_hash: string;
  provider_name: string;
  raw_output: string;
  gherkin_text: string | null;
  findings: { severity: "Error" | "Warning"; message: string }[];
  rubric: Record<Criterion, CriterionValue>;
  elapsed_ms: number;
  provider_latency_ms: number;
}

export interface ReviewResponse {
  id: string;
  score: number | null;
  status: string;
  rubric: Record<Criterion, CriterionValue>;
}

export interface SummaryRow {
  control_type: string;
  count: number;
  mean_scenario_sum: number;
  mean_rule_avg: number;
  table_final: number;
  mean_item_final: number;
}

export interface Histogram {
  bin_width: number;
  bins: { start: number; count: number }[];
  total: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      ...init,
      headers: {
        Authorization: `Bearer ${this.token}`,
        "Content-Type": "application/json",
        ...(init?.headers ?? {}),
      },
    });
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const error = body?.error ?? { code: `HTTP${response.status}`, message: "request failed" };
      throw new ApiError(response.status, error.code, error.message);
    }
    return body as T;
  }

  listRecords(status?: string): Promise<RecordSummary[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request(`/api/records${query}`);
  }

  getRecord(id: string): Promise<RecordDetail> {
    return this.request(`/api/records/${encodeURIComponent(id)}`);
  }

  submitReview(
    id: string,
    criteria: Partial<Record<Criterion, Bit>>,
    options: { reviewer?: string; needsRevision?: boolean } = {},
  ): Promise<ReviewResponse> {
    const payload: Record<string, unknown> = { ...criteria };
    if (options.reviewer) payload.reviewer = options.reviewer;
    if (options.needsRevision) payload.decision = "NeedsRevision";
    return this.request(`/api/records/${encodeURIComponent(id)}/review`, {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  scoreRubric(criteria: Record<Criterion, Bit>): Promise<{ score: number; accepted: boolean }> {
    return this.request("/api/score", { method: "POST", body: JSON.stringify(criteria) });
  }

  reportSummary(): Promise<SummaryRow[]> {
    return this.request("/api/reports/summary");
  }

  reportHistogram(binWidth: number): Promise<Histogram> {
    return this.request(`/api/reports/histogram?bin_width=${binWidth}`);
  }

  controlTypes(): Promise<{ control_types: { id: string; display_name: string }[] }> {
    return this.request("/api/control-types");
  }
}
