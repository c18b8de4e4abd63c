import { describe, expect, it } from "vitest";

import { boardHtml, checkState, renderBoard, SchemaError } from "../src/board.js";
import { TERRITORIES } from "../src/layout.js";
import { planTargets } from "../src/plan.js";
import type { ProposalJson, StateJson } from "../src/types.js";
import { fixture } from "./helpers.js";

const initial = fixture<StateJson>("initial_state.json");
const postAccept = fixture<StateJson>("post_accept_state.json");
const proposal = fixture<ProposalJson>("proposal.json");

function countTerritoryNodes(html: string): number {
  return (html.match(/<g class="territory/g) ?? []).length;
}

describe("renderBoard", () => {
  it("renders exactly the 21 canonical territories, in canonical order", () => {
    const vm = renderBoard(initial);
    expect(vm.territories).toHaveLength(21);
    expect(vm.territories.map((t) => t.id)).toEqual([...TERRITORIES]);
  });

  it("shows the empty initial board as all-neutral with reserves visible", () => {
    const vm = renderBoard(initial);
    for (const t of vm.territories) {
      expect(t.owner).toBeNull();
      expect(t.troops).toBe(0);
      expect(t.highlighted).toBe(false);
    }
    expect(vm.phase).toBe("InitialPlacement");
    expect(Object.fromEntries(vm.reserve)).toEqual({ White: 14, Black: 14, Grey: 14 });
    const html = boardHtml(vm);
    expect(countTerritoryNodes(html)).toBe(21);
    expect(html).toContain("White: 14");
    expect(html).toMatchSnapshot();
  });

  it("labels an owned territory with its troop count and owner styling", () => {
    const vm = renderBoard(postAccept);
    const redB = vm.territories.find((t) => t.id === "Red_B");
    expect(redB).toMatchObject({ owner: "White", troops: 7 });
    const html = boardHtml(vm);
    expect(html).toContain('data-territory="Red_B"');
    expect(html).toMatch(/data-territory="Red_B"><circle[^>]*fill="#fdfdfb"/);
    expect(html).toMatch(/data-territory="Red_B">.*?>7<\/text>/);
  });

  it("highlights exactly the territories the pending plan references", () => {
    const targets = planTargets(proposal);
    expect(targets).toEqual(new Set(["Red_B", "Red_C"]));
    const vm = renderBoard(postAccept, targets);
    const highlighted = vm.territories.filter((t) => t.highlighted).map((t) => t.id);
    expect(highlighted.sort()).toEqual(["Red_B", "Red_C"]);
    const html = boardHtml(vm);
    expect((html.match(/class="halo"/g) ?? []).length).toBe(2);
    expect(html).toMatchSnapshot();
  });

  it("maps the same payload to the same view every time", () => {
    const a = renderBoard(postAccept, planTargets(proposal));
    const b = renderBoard(postAccept, planTargets(proposal));
    expect(a).toEqual(b);
    expect(boardHtml(a)).toBe(boardHtml(b));
  });

  it("ignores highlight names that are not on the board", () => {
    const vm = renderBoard(initial, new Set(["Atlantis"]));
    expect(vm.territories.some((t) => t.highlighted)).toBe(false);
  });
});

describe("schema validation", () => {
  it("rejects payloads that are not objects", () => {
    expect(() => renderBoard(null)).toThrow(SchemaError);
    expect(() => renderBoard("nope")).toThrow(SchemaError);
    expect(() => renderBoard(42)).toThrow(SchemaError);
  });

  it("rejects a payload missing a territory entry", () => {
    const broken = JSON.parse(JSON.stringify(initial));
    delete broken.troops.Red_B;
    expect(() => renderBoard(broken)).toThrow(/troops map lacks Red_B/);
  });

  it("rejects non-numeric troops and non-string owners", () => {
    const badTroops = JSON.parse(JSON.stringify(initial));
    badTroops.troops.Red_A = "seven";
    expect(() => renderBoard(badTroops)).toThrow(SchemaError);
    const badOwner = JSON.parse(JSON.stringify(initial));
    badOwner.owner.Red_A = 3;
    expect(() => renderBoard(badOwner)).toThrow(SchemaError);
  });

  it("rejects a payload with no phase or reserve", () => {
    const noPhase: Record<string, unknown> = { ...initial };
    delete noPhase.phase;
    expect(() => checkState(noPhase)).toThrow(/phase/);
    const noReserve: Record<string, unknown> = { ...initial };
    delete noReserve.reserve;
    expect(() => checkState(noReserve)).toThrow(/reserve/);
  });
});
