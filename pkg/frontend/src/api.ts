/**
 * Typed client for the review service. GETs retry transient failures with
 * exponential backoff; decision POSTs never auto-retry (the queue surfaces
 * a retry banner instead).
 */

import type {
  DecisionRequest,
  QueueStats,
  SamplePage,
  SampleRecord,
  TaskName,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly code: string,
  ) {
    super(message);
  }
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

async function errorFrom(response: Response): Promise<ApiError> {
  let code = "unknown";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status message
  }
  return new ApiError(message, response.status, code);
}

export async function fetchWithRetry(
  url: string,
  options: RequestInit,
  retries = 2,
  backoffMs = 300,
): Promise<Response> {
  try {
    const response = await fetch(url, options);
    if ((response.status === 429 || response.status >= 500) && retries > 0) {
      await sleep(backoffMs);
      return fetchWithRetry(url, options, retries - 1, backoffMs * 2);
    }
    return response;
  } catch (err) {
    if (retries > 0) {
      await sleep(backoffMs);
      return fetchWithRetry(url, options, retries - 1, backoffMs * 2);
    }
    throw err;
  }
}

export class ReviewApi {
  constructor(
    private readonly baseUrl: string,
    private token: string | null = null,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private headers(json = false): HeadersInit {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private url(path: string, params?: Record<string, string>): string {
    const query = params ? `?${new URLSearchParams(params)}` : "";
    return `${this.baseUrl}/api/v1${path}${query}`;
  }

  async listPending(
    task: TaskName | null = null,
    page = 0,
    pageSize = 50,
  ): Promise<SamplePage> {
    const params: Record<string, string> = {
      state: "pending",
      page: String(page),
      page_size: String(pageSize),
    };
    if (task) params.task = task;
    const response = await fetchWithRetry(this.url("/samples", params), {
      headers: this.headers(),
    });
    if (!response.ok) throw await errorFrom(response);
    return response.json();
  }

  async stats(): Promise<QueueStats> {
    const response = await fetchWithRetry(this.url("/stats"), {
      headers: this.headers(),
    });
    if (!response.ok) throw await errorFrom(response);
    return response.json();
  }

  async submitDecision(decision: DecisionRequest): Promise<SampleRecord> {
    const response = await fetch(this.url("/decisions"), {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(decision),
    });
    if (!response.ok) throw await errorFrom(response);
    const body = await response.json();
    return body.sample;
  }
}
