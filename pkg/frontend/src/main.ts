/**
 * Browser entry point. Holds one session per tab, re-renders the whole view
 * from the latest server snapshot after every round-trip, and never mutates
 * state locally: a click sends the request, the response is what gets drawn.
 */

import { createClient, ServiceError, type Client } from "./api.js";
import { MalformedSnapshotError, type SessionSnapshot } from "./model.js";
import {
  buildViewModel,
  type ElementView,
  type FrameView,
  type ModuleView,
  type ObjectView,
  type RackView,
  type SessionView,
} from "./view.js";

const STRATEGIES = ["ui", "ordered", "generic", "algorithmic"];

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function badgeList(view: ObjectView): HTMLElement | null {
  if (view.badges.length === 0) {
    return null;
  }
  const list = el("span", "badges");
  for (const badge of view.badges) {
    const label =
      badge.missing > 0 ? `${badge.kind} (needs ${badge.missing})` : badge.kind;
    list.appendChild(el("span", "badge", label));
  }
  return list;
}

function objectHeader(view: ObjectView, linkStep?: number | null): HTMLElement {
  const header = el("div", "object-header");
  header.appendChild(el("span", "object-name", `${view.className} #${view.id}`));
  header.appendChild(el("span", "step-tag", `step ${view.step}`));
  if (linkStep !== undefined && linkStep !== null) {
    header.appendChild(el("span", "step-tag link-step", `linked step ${linkStep}`));
  }
  const badges = badgeList(view);
  if (badges) {
    header.appendChild(badges);
  }
  return header;
}

function moduleNode(module: ModuleView): HTMLElement {
  const node = el("li", "module");
  node.appendChild(objectHeader(module, module.linkStep));
  return node;
}

function frameNode(frame: FrameView): HTMLElement {
  const node = el("li", "frame");
  node.appendChild(objectHeader(frame, frame.linkStep));
  if (frame.modules.length > 0) {
    const list = el("ul", "modules");
    for (const module of frame.modules) {
      list.appendChild(moduleNode(module));
    }
    node.appendChild(list);
  }
  return node;
}

function rackNode(rack: RackView): HTMLElement {
  const node = el("li", "rack");
  node.appendChild(objectHeader(rack));
  if (rack.frames.length > 0) {
    const list = el("ul", "frames");
    for (const frame of rack.frames) {
      list.appendChild(frameNode(frame));
    }
    node.appendChild(list);
  }
  return node;
}

function elementNode(element: ElementView): HTMLElement {
  const node = el("li", "element");
  node.appendChild(objectHeader(element));
  if (element.modules.length > 0) {
    const refs = element.modules
      .map((ref) => `module #${ref.moduleId} @ step ${ref.linkStep}`)
      .join(", ");
    node.appendChild(el("div", "element-modules", refs));
  }
  return node;
}

function section(title: string, body: HTMLElement): HTMLElement {
  const wrapper = el("section");
  wrapper.appendChild(el("h2", undefined, title));
  wrapper.appendChild(body);
  return wrapper;
}

interface Handlers {
  onAction(index: number, step: number): void;
  onUndo(): void;
  onAutocomplete(): void;
  onExport(): void;
  onNewSession(strategy: string): void;
}

function buildPage(
  view: SessionView,
  snapshot: SessionSnapshot,
  notice: string,
  exported: string,
  handlers: Handlers,
): DocumentFragment {
  const page = document.createDocumentFragment();

  const status = el("header", "status-bar");
  status.appendChild(el("span", "step-counter", `step ${view.step}`));
  status.appendChild(
    el(
      "span",
      view.valid ? "validity valid" : "validity invalid",
      view.valid ? "valid" : `${view.violations.length} violation(s)`,
    ),
  );
  status.appendChild(el("span", "strategy", `strategy: ${view.strategy}`));
  page.appendChild(status);

  if (notice) {
    page.appendChild(el("div", "notice", notice));
  }

  const controls = el("div", "controls");
  const undoButton = el("button", "undo", "undo") as HTMLButtonElement;
  undoButton.disabled = view.step === 0;
  undoButton.addEventListener("click", handlers.onUndo);
  controls.appendChild(undoButton);
  const autoButton = el("button", "autocomplete", "autocomplete");
  autoButton.addEventListener("click", handlers.onAutocomplete);
  controls.appendChild(autoButton);
  const exportButton = el("button", "export", "export");
  exportButton.addEventListener("click", handlers.onExport);
  controls.appendChild(exportButton);
  const picker = el("select") as HTMLSelectElement;
  for (const name of STRATEGIES) {
    const option = el("option", undefined, name) as HTMLOptionElement;
    option.value = name;
    picker.appendChild(option);
  }
  picker.value = view.strategy;
  controls.appendChild(picker);
  const restart = el("button", "new-session", "new session");
  restart.addEventListener("click", () => handlers.onNewSession(picker.value));
  controls.appendChild(restart);
  page.appendChild(controls);

  const rackList = el("ul", "racks");
  for (const rack of view.racks) {
    rackList.appendChild(rackNode(rack));
  }
  page.appendChild(section("Racks", rackList));

  if (view.looseFrames.length > 0 || view.looseModules.length > 0) {
    const loose = el("ul", "loose");
    for (const frame of view.looseFrames) {
      loose.appendChild(frameNode(frame));
    }
    for (const module of view.looseModules) {
      loose.appendChild(moduleNode(module));
    }
    page.appendChild(section("Unplaced", loose));
  }

  const elementList = el("ul", "elements");
  for (const element of view.elements) {
    elementList.appendChild(elementNode(element));
  }
  page.appendChild(section("Elements", elementList));

  const actionList = el("ol", "actions") as HTMLOListElement;
  actionList.start = 0;
  for (const action of snapshot.actions) {
    const item = el("li", "action");
    const button = el("button", undefined, action.label);
    button.addEventListener("click", () =>
      handlers.onAction(action.index, snapshot.step),
    );
    item.appendChild(button);
    if (action.effects.length > 0) {
      item.appendChild(el("span", "effects", action.effects.join(" ")));
    }
    actionList.appendChild(item);
  }
  page.appendChild(section("Actions", actionList));

  if (exported) {
    const pre = el("pre", "exported", exported);
    page.appendChild(section("Exported configuration", pre));
  }

  return page;
}

export function boot(root: HTMLElement, baseUrl: string, client?: Client): void {
  const api = client ?? createClient(baseUrl);
  let snapshot: SessionSnapshot | null = null;
  let notice = "";
  let exported = "";

  function render(): void {
    if (snapshot === null) {
      return;
    }
    let page: DocumentFragment;
    try {
      // Build the entire page before touching the root so a bad snapshot
      // can never leave a half-drawn view behind.
      page = buildPage(buildViewModel(snapshot), snapshot, notice, exported, {
        onAction,
        onUndo,
        onAutocomplete,
        onExport,
        onNewSession,
      });
    } catch (error) {
      if (error instanceof MalformedSnapshotError) {
        root.replaceChildren(el("div", "error-banner", error.message));
        return;
      }
      throw error;
    }
    root.replaceChildren(page);
  }

  function fail(error: unknown): void {
    const message =
      error instanceof ServiceError ? error.message : String(error);
    notice = `request failed: ${message}`;
    render();
  }

  async function refresh(): Promise<void> {
    if (snapshot === null) {
      return;
    }
    snapshot = await api.getSession(snapshot.session_id);
    render();
  }

  function onAction(index: number, step: number): void {
    if (snapshot === null) {
      return;
    }
    const id = snapshot.session_id;
    api
      .applyAction(id, index, step)
      .then(async (outcome) => {
        if (outcome.kind === "stale") {
          notice = "the session moved on; actions reloaded";
          await refresh();
        } else {
          snapshot = outcome.snapshot;
          notice = "";
          exported = "";
          render();
        }
      })
      .catch(fail);
  }

  function onUndo(): void {
    if (snapshot === null) {
      return;
    }
    api
      .undo(snapshot.session_id)
      .then((fresh) => {
        snapshot = fresh;
        notice = "";
        exported = "";
        render();
      })
      .catch(fail);
  }

  function onAutocomplete(): void {
    if (snapshot === null) {
      return;
    }
    api
      .autocomplete(snapshot.session_id)
      .then((fresh) => {
        snapshot = fresh;
        notice = fresh.autocompleted
          ? `autocomplete added ${fresh.steps_added} step(s)`
          : `autocomplete gave up: ${fresh.result}`;
        exported = "";
        render();
      })
      .catch(fail);
  }

  function onExport(): void {
    if (snapshot === null) {
      return;
    }
    api
      .exportConfiguration(snapshot.session_id)
      .then((text) => {
        exported = text || "(empty configuration)";
        render();
      })
      .catch(fail);
  }

  function onNewSession(strategy: string): void {
    api
      .createSession({ strategy })
      .then((fresh) => {
        snapshot = fresh;
        notice = "";
        exported = "";
        render();
      })
      .catch(fail);
  }

  onNewSession("ui");
}

declare global {
  interface Window {
    __rackconfigBooted?: boolean;
  }
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root && !window.__rackconfigBooted) {
    window.__rackconfigBooted = true;
    boot(root, "");
  }
}
