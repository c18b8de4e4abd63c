/** Session controller: holds the latest server payloads and renders the
 * page from them — nothing on screen is computed client-side from stale
 * data. One mutation may be in flight per session; while planning runs,
 * the status endpoint is polled once a second for the banner. */

import { boardHtml, checkState, escapeHtml, renderBoard, SchemaError } from "./board.js";
import { controlsHtml, phaseControls } from "./controls.js";
import { planCard, planHtml, planTargets } from "./plan.js";
import type { ActionJson, ProposalJson, StateJson } from "./types.js";
import { ApiError, type ApiClient } from "./api.js";

export const POLL_INTERVAL_MS = 1000;

export interface Banner {
  kind: "error" | "info";
  text: string;
}

type PlannerApi = Pick<
  ApiClient,
  | "createSession"
  | "submitIntent"
  | "acceptPlan"
  | "refinePlan"
  | "planStatus"
  | "legalActions"
  | "playAction"
>;

export class SessionController {
  sessionId: string | null = null;
  mode = "Aligned";
  state: StateJson | null = null;
  proposal: ProposalJson | null = null;
  actions: ActionJson[] = [];
  busy = false;
  planStatus = "idle";
  banner: Banner | null = null;

  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: PlannerApi,
    private readonly onChange: () => void = () => {},
  ) {}

  /** Run one mutation at a time; concurrent calls are refused, not queued. */
  private async mutate<T>(fn: () => Promise<T>): Promise<T> {
    if (this.busy) throw new Error("a request is already in flight");
    this.busy = true;
    this.banner = null;
    this.onChange();
    try {
      return await fn();
    } catch (e) {
      if (e instanceof ApiError) {
        this.banner = { kind: "error", text: `${e.code}: ${e.message}${e.detail ? ` (${e.detail})` : ""}` };
      } else {
        this.banner = { kind: "error", text: String(e) };
      }
      throw e;
    } finally {
      this.busy = false;
      this.onChange();
    }
  }

  private startPolling(): void {
    if (this.pollTimer !== null) return;
    this.pollTimer = setInterval(() => {
      const id = this.sessionId;
      if (!id) return;
      this.api
        .planStatus(id)
        .then(({ status }) => {
          this.planStatus = status;
          this.onChange();
        })
        .catch(() => {});
    }, POLL_INTERVAL_MS);
  }

  private stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  async start(mode: string, seed: number | null = null): Promise<void> {
    await this.mutate(async () => {
      const { session_id, state } = await this.api.createSession(mode, seed);
      this.sessionId = session_id;
      this.mode = mode;
      this.state = state;
      this.proposal = null;
      this.planStatus = "idle";
      await this.refreshActions();
    });
  }

  async submitIntent(text: string): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      this.planStatus = "planning";
      this.startPolling();
      try {
        this.proposal = await this.api.submitIntent(id, text);
        this.planStatus = "ready";
      } finally {
        this.stopPolling();
      }
    });
  }

  async refine(feedback: string): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      this.planStatus = "planning";
      this.startPolling();
      try {
        this.proposal = await this.api.refinePlan(id, feedback);
        this.planStatus = "ready";
      } finally {
        this.stopPolling();
      }
    });
  }

  async accept(): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      const { state } = await this.api.acceptPlan(id);
      this.state = state;
      this.proposal = null;
      this.planStatus = "idle";
      await this.refreshActions();
    });
  }

  async play(action: ActionJson): Promise<void> {
    const id = this.requireSession();
    await this.mutate(async () => {
      const { state } = await this.api.playAction(id, action);
      this.state = state;
      await this.refreshActions();
    });
  }

  private async refreshActions(): Promise<void> {
    const id = this.requireSession();
    const { actions } = await this.api.legalActions(id);
    this.actions = actions;
  }

  private requireSession(): string {
    if (!this.sessionId) throw new Error("no active session");
    return this.sessionId;
  }
}

/** Compose the whole page from controller state. A payload that fails
 * validation produces an error banner and no board at all. */
export function viewHtml(c: SessionController): string {
  const parts: string[] = [];
  if (c.banner) {
    parts.push(`<div class="banner ${c.banner.kind}">${escapeHtml(c.banner.text)}</div>`);
  }
  if (!c.sessionId) {
    parts.push(
      `<div class="start-form">` +
        `<label>Mode <select name="mode"><option>Aligned</option><option>Agnostic</option><option>Adversarial</option></select></label>` +
        `<button data-act="start">New game</button>` +
        `</div>`,
    );
    return `<div class="planner-ui">${parts.join("")}</div>`;
  }
  parts.push(
    `<div class="session-line">session <code>${escapeHtml(c.sessionId)}</code> &middot; mode ${escapeHtml(c.mode)}` +
      ` &middot; plan status: <b>${escapeHtml(c.planStatus)}</b>${c.busy ? " &middot; working&hellip;" : ""}</div>`,
  );
  if (c.state !== null) {
    try {
      const highlights = c.proposal ? planTargets(c.proposal) : new Set<string>();
      parts.push(boardHtml(renderBoard(c.state, highlights)));
    } catch (e) {
      if (e instanceof SchemaError) {
        parts.push(`<div class="banner error">${escapeHtml(e.message)}</div>`);
      } else {
        throw e;
      }
    }
  }
  const disabled = c.busy ? " disabled" : "";
  parts.push(
    `<form class="intent-form" data-act="intent-form">` +
      `<input name="strategy" placeholder="Describe your strategy&hellip;" autocomplete="off"${disabled}/>` +
      `<button data-act="intent"${disabled}>Plan</button>` +
      `</form>`,
  );
  if (c.proposal) {
    parts.push(planHtml(planCard(c.proposal, c.busy)));
  } else if (c.state !== null) {
    try {
      parts.push(controlsHtml(phaseControls(checkState(c.state), c.actions)));
    } catch (e) {
      if (!(e instanceof SchemaError)) throw e;
    }
  }
  return `<div class="planner-ui">${parts.join("")}</div>`;
}
