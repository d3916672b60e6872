// Session panel: wires one service session to the residual tree, a draft
// box for out-of-turn inputs, and the history controls. All state shown to
// the user comes from the last View the service returned; the panel itself
// never specializes anything.

import { ApiError } from "./api.js";
import type { Client, ContentNode, InputPair, ProgramNode, View } from "./api.js";
import { createResidualTree } from "./treeview.js";

// "Party=Dem, State!=NY, Sen" -> [["Party","Dem"], ["State","!NY"], ["Sen","true"]].
// Duplicate keys pass through untouched so the server sees the conflict.
export const parseDraft = (text: string): InputPair[] => {
  const pairs: InputPair[] = [];
  for (const chunk of text.split(",")) {
    const entry = chunk.trim();
    if (!entry) continue;
    const denial = entry.match(/^([^=!\s]+)\s*!=\s*(.+)$/);
    if (denial) {
      pairs.push([denial[1], `!${denial[2].trim()}`]);
      continue;
    }
    const eq = entry.indexOf("=");
    if (eq >= 0) {
      pairs.push([entry.slice(0, eq).trim(), entry.slice(eq + 1).trim()]);
    } else {
      pairs.push([entry, "true"]);
    }
  }
  return pairs;
};

export const formatStep = (action: string, set: Record<string, string | string[]>): string => {
  const parts = Object.entries(set).map(([key, value]) =>
    Array.isArray(value) ? `${key}=${value.join("&")}` : `${key}=${value}`,
  );
  return `${action} ${parts.join(", ")}`;
};

const contentLeaves = (node: ProgramNode | null): ContentNode[] => {
  if (node === null) return [];
  if (node.kind === "content") return [node];
  if (node.kind === "seq") return node.children.flatMap(contentLeaves);
  return node.arms.flatMap((arm) => contentLeaves(arm.body));
};

export type SessionPanel = {
  element: HTMLElement;
  open(): Promise<void>;
  idle(): Promise<void>;
  token(): string;
  currentView(): View | null;
};

export type SessionPanelOptions = {
  client: Client;
  model: string;
};

export const createSessionPanel = (options: SessionPanelOptions): SessionPanel => {
  const { client, model } = options;
  let view: View | null = null;
  let inflight: Promise<void> | null = null;

  const element = document.createElement("div");
  element.className = "session-panel";

  const toolbar = document.createElement("div");
  toolbar.className = "toolbar";
  const undoBtn = document.createElement("button");
  undoBtn.type = "button";
  undoBtn.className = "undo-btn";
  undoBtn.textContent = "Undo";
  undoBtn.disabled = true;
  const resetBtn = document.createElement("button");
  resetBtn.type = "button";
  resetBtn.className = "reset-btn";
  resetBtn.textContent = "Reset";
  const crumbs = document.createElement("span");
  crumbs.className = "crumbs";
  toolbar.append(undoBtn, resetBtn, crumbs);

  const form = document.createElement("form");
  form.className = "draft-form";
  const draftInput = document.createElement("input");
  draftInput.className = "draft-input";
  draftInput.placeholder = "jump ahead: Party=Dem, State=CA";
  draftInput.setAttribute("aria-label", "out-of-turn input");
  const applyBtn = document.createElement("button");
  applyBtn.type = "submit";
  applyBtn.className = "apply-btn";
  applyBtn.textContent = "Apply";
  form.append(draftInput, applyBtn);

  const errorBox = document.createElement("div");
  errorBox.className = "error-box";
  errorBox.hidden = true;

  const contentPanel = document.createElement("div");
  contentPanel.className = "content-panel";
  contentPanel.hidden = true;

  const tree = createResidualTree({
    onArmClick: (test) => run(() => mutate((token) => client.browse(token, test.key, test.value))),
  });

  element.append(toolbar, form, errorBox, contentPanel, tree.element);

  const setBusy = (busy: boolean): void => {
    element.classList.toggle("busy", busy);
    resetBtn.disabled = busy;
    applyBtn.disabled = busy;
    draftInput.disabled = busy;
    undoBtn.disabled = busy || !view || view.breadcrumb.length === 0;
    tree.element
      .querySelectorAll<HTMLButtonElement>("button.tree-row--offered")
      .forEach((btn) => (btn.disabled = busy));
  };

  const showError = (message: string): void => {
    errorBox.textContent = message;
    errorBox.hidden = false;
  };

  const renderView = (next: View): void => {
    view = next;
    errorBox.hidden = true;
    errorBox.textContent = "";
    tree.setRoot(next.residual.root, next.available);
    crumbs.innerHTML = "";
    for (const step of next.breadcrumb) {
      const chip = document.createElement("span");
      chip.className = "crumb";
      chip.textContent = formatStep(step.action, step.set);
      crumbs.appendChild(chip);
    }
    undoBtn.disabled = next.breadcrumb.length === 0;
    if (next.complete) {
      contentPanel.hidden = false;
      contentPanel.innerHTML = "";
      const heading = document.createElement("div");
      heading.className = "content-heading";
      heading.textContent = "Personalized to completion";
      contentPanel.appendChild(heading);
      for (const leaf of contentLeaves(next.residual.root)) {
        const item = document.createElement("div");
        item.className = "content-item";
        const ref = document.createElement("strong");
        ref.textContent = leaf.ref;
        item.appendChild(ref);
        if (leaf.payload) {
          item.appendChild(document.createTextNode(` ${leaf.payload}`));
        }
        contentPanel.appendChild(item);
      }
      if (next.residual.root === null) {
        const none = document.createElement("div");
        none.className = "content-item";
        none.textContent = "no content: every path was excluded";
        contentPanel.appendChild(none);
      }
    } else {
      contentPanel.hidden = true;
      contentPanel.innerHTML = "";
    }
  };

  const mutate = async (action: (token: string) => Promise<View>): Promise<void> => {
    if (!view) throw new Error("session not open");
    renderView(await action(view.session));
  };

  // One request at a time: anything clicked while a request is pending is
  // dropped, and every control is disabled until the response lands.
  const run = (work: () => Promise<void>): void => {
    if (inflight) return;
    setBusy(true);
    inflight = work()
      .catch((err) => {
        if (err instanceof ApiError) {
          showError(`${err.error}: ${err.detail}`);
        } else {
          showError(err instanceof Error ? err.message : String(err));
        }
      })
      .finally(() => {
        inflight = null;
        setBusy(false);
      });
  };

  undoBtn.addEventListener("click", () => run(() => mutate((token) => client.undo(token))));
  resetBtn.addEventListener("click", () => run(() => mutate((token) => client.reset(token))));
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const pairs = parseDraft(draftInput.value);
    if (pairs.length === 0) return;
    run(async () => {
      await mutate((token) => client.input(token, pairs));
      draftInput.value = "";
    });
  });

  return {
    element,
    open: () => {
      run(async () => {
        renderView(await client.openSession(model));
      });
      return inflight ?? Promise.resolve();
    },
    idle: async () => {
      while (inflight) {
        await inflight;
      }
    },
    token: () => {
      if (!view) throw new Error("session not open");
      return view.session;
    },
    currentView: () => view,
  };
};
