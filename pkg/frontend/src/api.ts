/** Typed client for the planner service HTTP API. Non-2xx responses become
 * ApiError carrying the server's {code, message, detail} verbatim. */

import type { ActionJson, ProposalJson, SessionSnapshot, StateJson } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly detail: string = "",
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
    private readonly authToken: string | null = null,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.authToken) headers["Authorization"] = `Bearer ${this.authToken}`;
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    let doc: unknown = null;
    const text = await res.text();
    if (text) {
      try {
        doc = JSON.parse(text);
      } catch {
        doc = null;
      }
    }
    if (!res.ok) {
      const err = (doc ?? {}) as { code?: string; message?: string; detail?: string };
      throw new ApiError(res.status, err.code ?? `http_${res.status}`, err.message ?? res.statusText, err.detail ?? "");
    }
    return doc as T;
  }

  createSession(mode: string, seed: number | null = null): Promise<{ session_id: string; state: StateJson }> {
    return this.request("POST", "/sessions", { mode, seed });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  submitIntent(sessionId: string, strategyText: string, reuseLastIntent = false): Promise<ProposalJson> {
    return this.request("POST", `/sessions/${sessionId}/intent`, {
      strategy_text: strategyText,
      reuse_last_intent: reuseLastIntent,
    });
  }

  acceptPlan(sessionId: string): Promise<{ state: StateJson }> {
    return this.request("POST", `/sessions/${sessionId}/plan/accept`);
  }

  refinePlan(sessionId: string, feedbackText: string): Promise<ProposalJson> {
    return this.request("POST", `/sessions/${sessionId}/plan/refine`, { feedback_text: feedbackText });
  }

  planStatus(sessionId: string): Promise<{ status: string }> {
    return this.request("GET", `/sessions/${sessionId}/plan/status`);
  }

  legalActions(sessionId: string): Promise<{ actions: ActionJson[] }> {
    return this.request("GET", `/sessions/${sessionId}/actions`);
  }

  playAction(sessionId: string, action: ActionJson): Promise<{ state: StateJson }> {
    return this.request("POST", `/sessions/${sessionId}/actions`, { action });
  }

  history(sessionId: string): Promise<{ steps: [StateJson, ActionJson][] }> {
    return this.request("GET", `/sessions/${sessionId}/history`);
  }
}
