/** Board view: a deterministic mapping from a server state payload to a
 * view model and its SVG rendering. The view never invents data — every
 * number shown comes from the payload, and a malformed payload raises
 * SchemaError before anything renders. */

import { CONTINENT_COLORS, EDGES, LAYOUT, TERRITORIES, VIEW_HEIGHT, VIEW_WIDTH, ownerFill } from "./layout.js";
import type { StateJson } from "./types.js";

export class SchemaError extends Error {}

export interface TerritoryView {
  id: string;
  continent: string;
  owner: string | null;
  troops: number;
  highlighted: boolean;
}

export interface BoardViewModel {
  territories: TerritoryView[];
  phase: string;
  currentPlayer: string;
  reserve: [player: string, troops: number][];
  turn: number;
}

function fail(reason: string): never {
  throw new SchemaError(`bad state payload: ${reason}`);
}

/** Validate an untrusted payload into a StateJson covering all territories. */
export function checkState(payload: unknown): StateJson {
  if (typeof payload !== "object" || payload === null) fail("not an object");
  const doc = payload as Record<string, unknown>;
  for (const key of ["owner", "troops", "reserve"]) {
    if (typeof doc[key] !== "object" || doc[key] === null) fail(`missing '${key}' map`);
  }
  if (typeof doc.phase !== "string") fail("missing 'phase'");
  if (typeof doc.current_player !== "string") fail("missing 'current_player'");
  const owner = doc.owner as Record<string, unknown>;
  const troops = doc.troops as Record<string, unknown>;
  for (const t of TERRITORIES) {
    if (!(t in owner)) fail(`owner map lacks ${t}`);
    if (!(t in troops)) fail(`troops map lacks ${t}`);
    const o = owner[t];
    if (o !== null && typeof o !== "string") fail(`owner of ${t} is not a player name`);
    if (typeof troops[t] !== "number") fail(`troops of ${t} is not a number`);
  }
  const reserve = doc.reserve as Record<string, unknown>;
  for (const [p, n] of Object.entries(reserve)) {
    if (typeof n !== "number") fail(`reserve of ${p} is not a number`);
  }
  return {
    owner: owner as Record<string, string | null>,
    troops: troops as Record<string, number>,
    phase: doc.phase,
    current_player: doc.current_player,
    reserve: reserve as Record<string, number>,
    turn: typeof doc.turn === "number" ? doc.turn : 0,
    rng_seed: typeof doc.rng_seed === "number" ? doc.rng_seed : 0,
  };
}

/** Build the view model: exactly the canonical territories, in canonical
 * order, highlighted only where the pending plan references them. */
export function renderBoard(payload: unknown, highlights: ReadonlySet<string> = new Set()): BoardViewModel {
  const state = checkState(payload);
  const territories = TERRITORIES.map((id) => ({
    id,
    continent: LAYOUT[id].continent,
    owner: state.owner[id],
    troops: state.troops[id],
    highlighted: highlights.has(id),
  }));
  return {
    territories,
    phase: state.phase,
    currentPlayer: state.current_player,
    reserve: Object.entries(state.reserve).map(([p, n]) => [p, n] as [string, number]),
    turn: state.turn,
  };
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function territorySvg(t: TerritoryView): string {
  const spot = LAYOUT[t.id];
  const { fill, text } = ownerFill(t.owner);
  const ring = CONTINENT_COLORS[t.continent];
  const classes = ["territory", t.owner === null ? "neutral" : "owned"];
  if (t.highlighted) classes.push("highlight");
  const halo = t.highlighted
    ? `<circle class="halo" cx="${spot.x}" cy="${spot.y}" r="34" fill="none" stroke="#e6b800" stroke-width="4"/>`
    : "";
  const dash = t.owner === null ? ' stroke-dasharray="4 3"' : "";
  const count = t.owner === null ? "" : `<text class="count" x="${spot.x}" y="${spot.y + 6}" text-anchor="middle" fill="${text}" font-size="18" font-weight="bold">${t.troops}</text>`;
  return (
    `<g class="${classes.join(" ")}" data-territory="${t.id}">` +
    halo +
    `<circle cx="${spot.x}" cy="${spot.y}" r="26" fill="${fill}" stroke="${ring}" stroke-width="3"${dash}/>` +
    count +
    `<text class="name" x="${spot.x}" y="${spot.y + 44}" text-anchor="middle" font-size="12" fill="#444">${t.id}</text>` +
    `</g>`
  );
}

/** Render the full board section: phase banner, reserve counters, SVG map. */
export function boardHtml(vm: BoardViewModel): string {
  const reserve = vm.reserve
    .map(([p, n]) => `<span class="reserve-chip" data-player="${escapeHtml(p)}">${escapeHtml(p)}: ${n}</span>`)
    .join(" ");
  const edges = EDGES.map(([a, b]) => {
    const pa = LAYOUT[a];
    const pb = LAYOUT[b];
    return `<line x1="${pa.x}" y1="${pa.y}" x2="${pb.x}" y2="${pb.y}" stroke="#c9c4b8" stroke-width="2"/>`;
  }).join("");
  const nodes = vm.territories.map(territorySvg).join("");
  return (
    `<div class="board">` +
    `<div class="phase-banner">Phase: <b>${escapeHtml(vm.phase)}</b> &middot; to move: <b>${escapeHtml(vm.currentPlayer)}</b> &middot; turn ${vm.turn}</div>` +
    `<div class="reserve-bar">Reserve &mdash; ${reserve}</div>` +
    `<svg viewBox="0 0 ${VIEW_WIDTH} ${VIEW_HEIGHT}" role="img" aria-label="game board">` +
    `<g class="edges">${edges}</g><g class="nodes">${nodes}</g>` +
    `</svg>` +
    `</div>`
  );
}
