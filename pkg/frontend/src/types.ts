/** Wire types for the planner service JSON API. */

export interface StateJson {
  owner: Record<string, string | null>;
  troops: Record<string, number>;
  phase: string;
  current_player: string;
  reserve: Record<string, number>;
  turn: number;
  rng_seed: number;
}

export interface ActionJson {
  kind: string;
  territory?: string;
  from?: string;
  to?: string;
  n?: number;
}

export interface StepJson {
  step_id: number;
  intent: string;
  constraint: string;
  action: ActionJson;
}

export interface ProposalJson {
  steps: StepJson[];
  fitness_before: number;
  fitness_after: number;
  telemetry: Record<string, unknown>;
}

export interface SessionSnapshot {
  session_id: string;
  mode: string;
  state: StateJson;
  pending_proposal: ProposalJson | null;
  history_len: number;
  plan_status: string;
  created: number;
  updated: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: string;
}
