/** Thin fetch client for the annotation service HTTP API. */

import type { Span } from "./spans.js";

export interface TaskHighlights {
  support_span: Span | null;
  error_span: Span | null;
}

export interface Task {
  example_id: string;
  document: string;
  claim: string;
  condition: "HIGHLIGHTS_ON" | "HIGHLIGHTS_OFF";
  highlights: TaskHighlights | null;
}

export interface NextTaskResponse {
  exhausted: boolean;
  task: Task | null;
}

export interface JudgmentPayload {
  example_id: string;
  worker_id: string;
  label: "CONSISTENT" | "INCONSISTENT";
  condition: string;
  elapsed_ms: number;
  doc_highlights: Span[];
  claim_highlights: Span[];
  session?: string;
}

export interface SurveyPayload {
  worker_id: string;
  article_helpfulness: "not" | "somewhat" | "very";
  claim_helpfulness: "not" | "somewhat" | "very";
  session?: string;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, detail);
}

export class AnnotationClient {
  constructor(
    private baseUrl = "",
    private session = "default",
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  async nextTask(workerId: string): Promise<NextTaskResponse> {
    const params = new URLSearchParams({ worker: workerId, session: this.session });
    const resp = await this.fetchFn(`${this.baseUrl}/api/tasks/next?${params}`);
    await raiseForStatus(resp);
    return resp.json();
  }

  async submitJudgment(payload: JudgmentPayload): Promise<void> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/judgments`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ ...payload, session: this.session }),
    });
    await raiseForStatus(resp);
  }

  async submitSurvey(payload: SurveyPayload): Promise<void> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/survey`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ ...payload, session: this.session }),
    });
    await raiseForStatus(resp);
  }

  async getExample(exampleId: string): Promise<{
    id: string;
    doc_id: string;
    text: string;
    claim: string;
    extraction_span: Span;
    augmentation_span: Span | null;
  }> {
    const params = new URLSearchParams({ session: this.session });
    const resp = await this.fetchFn(
      `${this.baseUrl}/api/examples/${encodeURIComponent(exampleId)}?${params}`,
    );
    await raiseForStatus(resp);
    return resp.json();
  }
}
