/**
 * Calibration session client: a thin, testable wrapper over the HTTP
 * API. All state lives on the server; this module only moves it.
 */

export interface ParamSpecView {
  name: string;
  default: number;
  min: number;
  max: number;
}

export interface SessionInfo {
  id: string;
  specs: ParamSpecView[];
}

export interface ComparisonView {
  done: false;
  param: string;
  option_a: number;
  option_b: number;
  param_index: number;
  comparison_index: number;
  n_params: number;
  stimulus_target: string;
  stimulus_reference: string;
  proxy_a: string;
  proxy_b: string;
}

export interface SessionDone {
  done: true;
}

export type ComparisonResponse = ComparisonView | SessionDone;

export interface SessionResult {
  complete: boolean;
  values: Record<string, number>;
  transcript: unknown[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }

  /** 404/409 mean stale client state: refetch, do not crash. */
  get retryable(): boolean {
    return this.status === 404 || this.status === 409;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    throw new ApiError(resp.status, await resp.text());
  }
  return (await resp.json()) as T;
}

export function formatProgress(c: ComparisonView): string {
  return `parameter ${c.param_index + 1} of ${c.n_params}, comparison ${
    c.comparison_index + 1
  } of 3`;
}

export class SessionClient {
  constructor(
    readonly baseUrl: string,
    readonly sessionId: string,
  ) {}

  static async create(baseUrl: string): Promise<SessionClient> {
    const info = await request<SessionInfo>(`${baseUrl}/session`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "{}",
    });
    return new SessionClient(baseUrl, info.id);
  }

  /** Re-attach to an existing session; the server is the source of truth. */
  static resume(baseUrl: string, sessionId: string): SessionClient {
    return new SessionClient(baseUrl, sessionId);
  }

  getComparison(): Promise<ComparisonResponse> {
    return request<ComparisonResponse>(
      `${this.baseUrl}/session/${this.sessionId}/comparison`,
    );
  }

  /**
   * Submit one forced choice. The comparison identity is echoed back so
   * the server can reject duplicates and out-of-order submissions.
   */
  submitChoice(comparison: ComparisonView, value: number): Promise<{ done: boolean }> {
    return request(`${this.baseUrl}/session/${this.sessionId}/choice`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        value,
        param: comparison.param,
        comparison_index: comparison.comparison_index,
      }),
    });
  }

  getResult(): Promise<SessionResult> {
    return request<SessionResult>(
      `${this.baseUrl}/session/${this.sessionId}/result`,
    );
  }

  /** Raw result body for export; byte-identical to the service response. */
  async resultText(): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/session/${this.sessionId}/result`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.text();
  }
}
