/** Browser entry point: bind the controller to #app with event delegation. */

import { ApiClient } from "./api.js";
import { SessionController, viewHtml } from "./app.js";
import type { ActionJson } from "./types.js";

function apiBase(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? window.location.origin;
}

function mount(root: HTMLElement): void {
  const controller = new SessionController(new ApiClient(apiBase()), () => {
    root.innerHTML = viewHtml(controller);
  });
  root.innerHTML = viewHtml(controller);

  const swallow = (p: Promise<unknown>) => p.catch(() => {}); // errors land in the banner

  root.addEventListener("click", (ev) => {
    const target = (ev.target as HTMLElement).closest("[data-act]");
    if (!(target instanceof HTMLElement)) return;
    const act = target.dataset.act;
    if (act === "start") {
      const mode = (root.querySelector("select[name=mode]") as HTMLSelectElement | null)?.value ?? "Aligned";
      swallow(controller.start(mode));
    } else if (act === "accept") {
      swallow(controller.accept());
    } else if (act === "refine") {
      const input = root.querySelector("input[name=feedback]") as HTMLInputElement | null;
      swallow(controller.refine(input?.value ?? ""));
    } else if (act === "play") {
      const action = JSON.parse(target.dataset.actionJson ?? "{}") as ActionJson;
      swallow(controller.play(action));
    } else if (act === "play-selected") {
      const kind = target.dataset.kind ?? "";
      const select = root.querySelector(`select[name=${kind}]`) as HTMLSelectElement | null;
      if (select) swallow(controller.play(JSON.parse(select.value) as ActionJson));
    }
  });

  root.addEventListener("submit", (ev) => {
    const form = ev.target as HTMLElement;
    if (form.dataset.act !== "intent-form") return;
    ev.preventDefault();
    const input = root.querySelector("input[name=strategy]") as HTMLInputElement | null;
    const text = input?.value ?? "";
    swallow(controller.submitIntent(text));
  });
}

if (typeof document !== "undefined") {
  const appRoot = document.getElementById("app");
  if (appRoot) mount(appRoot);
}
