/** Phase controls: group the server's legal actions into one widget per
 * action family. A family with no legal member is hidden entirely; a
 * terminal state (no actions at all) yields an empty control set. */

import { escapeHtml } from "./board.js";
import { describeAction } from "./plan.js";
import type { ActionJson, StateJson } from "./types.js";

export interface PhaseWidget {
  kind: string;
  label: string;
  options: ActionJson[];
}

const FAMILY_ORDER = ["place", "reinforce", "attack", "move", "end_phase"] as const;

const FAMILY_LABELS: Record<string, string> = {
  place: "Place troops",
  reinforce: "Reinforce",
  attack: "Attack",
  move: "Freemove",
  end_phase: "End phase",
};

export function phaseControls(state: StateJson, actions: ActionJson[]): PhaseWidget[] {
  const byKind = new Map<string, ActionJson[]>();
  for (const a of actions) {
    const bucket = byKind.get(a.kind);
    if (bucket) bucket.push(a);
    else byKind.set(a.kind, [a]);
  }
  const widgets: PhaseWidget[] = [];
  for (const kind of FAMILY_ORDER) {
    const options = byKind.get(kind);
    if (!options || options.length === 0) continue;
    widgets.push({ kind, label: FAMILY_LABELS[kind] ?? kind, options });
  }
  for (const [kind, options] of byKind) {
    if (!(FAMILY_ORDER as readonly string[]).includes(kind)) {
      widgets.push({ kind, label: kind, options });
    }
  }
  return widgets;
}

export function controlsHtml(widgets: PhaseWidget[]): string {
  if (widgets.length === 0) return `<div class="controls empty">No moves available.</div>`;
  const parts = widgets.map((w) => {
    if (w.kind === "end_phase") {
      const payload = escapeHtml(JSON.stringify(w.options[0]));
      return `<div class="widget" data-kind="end_phase"><button data-act="play" data-action-json="${payload}">End phase</button></div>`;
    }
    const options = w.options
      .map((a) => `<option value="${escapeHtml(JSON.stringify(a))}">${escapeHtml(describeAction(a))}</option>`)
      .join("");
    return (
      `<div class="widget" data-kind="${w.kind}">` +
      `<label>${escapeHtml(w.label)} <select name="${w.kind}">${options}</select></label>` +
      `<button data-act="play-selected" data-kind="${w.kind}">Play</button>` +
      `</div>`
    );
  });
  return `<div class="controls">${parts.join("")}</div>`;
}
