/** Plan review card: ordered steps, each showing the step's intent and its
 * constraint verbatim alongside a one-line action summary, plus
 * accept/refine controls that lock while a request is in flight. */

import { escapeHtml } from "./board.js";
import type { ActionJson, ProposalJson } from "./types.js";

export interface PlanStepView {
  stepId: number;
  intent: string;
  constraint: string;
  action: string;
}

export interface PlanCardView {
  steps: PlanStepView[];
  fitnessBefore: number;
  fitnessAfter: number;
  rollouts: number | null;
  constraintFilter: boolean | null;
  controlsEnabled: boolean;
}

export function describeAction(a: ActionJson): string {
  switch (a.kind) {
    case "place":
      return `place ${a.n} on ${a.territory}`;
    case "reinforce":
      return `reinforce ${a.territory} with ${a.n}`;
    case "attack":
      return `attack ${a.to} from ${a.from} with ${a.n}`;
    case "move":
      return `move ${a.n} from ${a.from} to ${a.to}`;
    case "end_phase":
      return "end phase";
    default:
      return a.kind;
  }
}

/** Steps stay in proposal order; controls disable while busy. */
export function planCard(proposal: ProposalJson, busy: boolean): PlanCardView {
  const t = proposal.telemetry ?? {};
  return {
    steps: proposal.steps.map((s) => ({
      stepId: s.step_id,
      intent: s.intent,
      constraint: s.constraint,
      action: describeAction(s.action),
    })),
    fitnessBefore: proposal.fitness_before,
    fitnessAfter: proposal.fitness_after,
    rollouts: typeof t.rollouts === "number" ? t.rollouts : null,
    constraintFilter: typeof t.constraint_filter === "boolean" ? t.constraint_filter : null,
    controlsEnabled: !busy,
  };
}

/** Territories a proposal touches, for board highlighting. */
export function planTargets(proposal: ProposalJson): Set<string> {
  const targets = new Set<string>();
  for (const step of proposal.steps) {
    for (const key of ["territory", "from", "to"] as const) {
      const t = step.action[key];
      if (t) targets.add(t);
    }
  }
  return targets;
}

export function planHtml(card: PlanCardView): string {
  const disabled = card.controlsEnabled ? "" : " disabled";
  const steps = card.steps
    .map(
      (s) =>
        `<li class="plan-step" data-step="${s.stepId}">` +
        `<div class="step-intent">${escapeHtml(s.intent)}</div>` +
        `<div class="step-constraint"><code>${escapeHtml(s.constraint)}</code></div>` +
        `<div class="step-action">&rarr; ${escapeHtml(s.action)}</div>` +
        `</li>`,
    )
    .join("");
  const filterNote =
    card.constraintFilter === null ? "" : card.constraintFilter ? " &middot; constraint filter on" : " &middot; constraint filter off";
  const rollouts = card.rollouts === null ? "" : ` &middot; ${card.rollouts} rollouts`;
  return (
    `<div class="plan-card">` +
    `<div class="plan-head">Proposed plan` +
    `<span class="plan-meta">fitness ${card.fitnessBefore.toFixed(3)} &rarr; ${card.fitnessAfter.toFixed(3)}${rollouts}${filterNote}</span></div>` +
    `<ol class="plan-steps">${steps}</ol>` +
    `<div class="plan-actions">` +
    `<button data-act="accept"${disabled}>Accept plan</button>` +
    `<input name="feedback" placeholder="refinement feedback"${disabled}/>` +
    `<button data-act="refine"${disabled}>Refine</button>` +
    `</div>` +
    `</div>`
  );
}
