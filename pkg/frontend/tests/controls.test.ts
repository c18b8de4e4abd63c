import { describe, expect, it } from "vitest";

import { controlsHtml, phaseControls } from "../src/controls.js";
import type { ActionJson, StateJson } from "../src/types.js";
import { fixture } from "./helpers.js";

interface ControlsFixture {
  state: StateJson;
  actions: ActionJson[];
}

function inventory(name: string): { kind: string; n: number }[] {
  const { state, actions } = fixture<ControlsFixture>(name);
  return phaseControls(state, actions).map((w) => ({ kind: w.kind, n: w.options.length }));
}

describe("phaseControls", () => {
  it("matches the golden control inventory for each fixture state", () => {
    expect(inventory("controls_reinforce.json")).toEqual([{ kind: "reinforce", n: 3 }]);
    expect(inventory("controls_attack.json")).toEqual([
      { kind: "attack", n: 6 },
      { kind: "end_phase", n: 1 },
    ]);
    expect(inventory("controls_attack_empty.json")).toEqual([{ kind: "end_phase", n: 1 }]);
    expect(inventory("controls_freemove_single.json")).toEqual([{ kind: "end_phase", n: 1 }]);
  });

  it("hides the attack widget when no attack is legal", () => {
    const { state, actions } = fixture<ControlsFixture>("controls_attack_empty.json");
    expect(state.phase).toBe("Attack");
    const widgets = phaseControls(state, actions);
    expect(widgets.some((w) => w.kind === "attack")).toBe(false);
  });

  it("hides the freemove widget when only one territory is owned", () => {
    const { state, actions } = fixture<ControlsFixture>("controls_freemove_single.json");
    expect(state.phase).toBe("Freemove");
    const widgets = phaseControls(state, actions);
    expect(widgets.some((w) => w.kind === "move")).toBe(false);
  });

  it("yields an empty control set at terminal states", () => {
    const { state } = fixture<ControlsFixture>("controls_attack.json");
    expect(phaseControls(state, [])).toEqual([]);
    expect(controlsHtml([])).toContain("No moves available");
  });

  it("keeps every legal action reachable through its widget", () => {
    const { state, actions } = fixture<ControlsFixture>("controls_attack.json");
    const widgets = phaseControls(state, actions);
    const offered = widgets.flatMap((w) => w.options);
    expect(offered).toHaveLength(actions.length);
    expect(new Set(offered.map((a) => JSON.stringify(a)))).toEqual(new Set(actions.map((a) => JSON.stringify(a))));
  });

  it("renders widgets with selectable options and snapshot-stable markup", () => {
    const { state, actions } = fixture<ControlsFixture>("controls_attack.json");
    const html = controlsHtml(phaseControls(state, actions));
    expect(html).toContain('data-kind="attack"');
    expect(html).toContain("attack Red_C from Red_A with 1");
    expect(html).toContain('data-kind="end_phase"');
    expect(html).toMatchSnapshot();
  });
});
