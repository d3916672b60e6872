// Collapsible rendering of a residual program. The component performs no
// specialization: it draws exactly the node tree the service sent, and the
// outline() of that tree is the single source of truth for what a fully
// expanded rendering must contain, row for row.

import type { ProgramNode, TestRef } from "./api.js";

export type OutlineRow = {
  path: string;
  depth: number;
  kind: "arm" | "content";
  label: string;
  test?: TestRef;
  ref?: string;
  payload?: string;
};

export const testLabel = (test: TestRef): string =>
  test.value === "true" ? test.key : `${test.key}=${test.value}`;

// Full-expansion row list: one arm row per chain arm (its body nested one
// level deeper), one content row per leaf. Seq children stay at their
// parent's depth, mirroring how the surface syntax lists statements.
export const outline = (node: ProgramNode | null): OutlineRow[] => {
  const rows: OutlineRow[] = [];
  const walk = (n: ProgramNode, path: string, depth: number): void => {
    if (n.kind === "content") {
      rows.push({ path, depth, kind: "content", label: n.ref, ref: n.ref, payload: n.payload });
      return;
    }
    if (n.kind === "seq") {
      n.children.forEach((child, i) => walk(child, `${path}.s${i}`, depth));
      return;
    }
    n.arms.forEach((arm, i) => {
      const armPath = `${path}.${i}`;
      rows.push({
        path: armPath,
        depth,
        kind: "arm",
        label: testLabel(arm.test),
        test: { key: arm.test.key, value: arm.test.value },
      });
      walk(arm.body, `${armPath}.b`, depth + 1);
    });
  };
  if (node !== null) {
    walk(node, "r", 0);
  }
  return rows;
};

type ResidualTreeOptions = {
  onArmClick?: (test: TestRef) => void;
};

export type ResidualTree = {
  element: HTMLElement;
  setRoot(root: ProgramNode | null, offered: TestRef[]): void;
  toggle(path: string): void;
};

const sameTest = (a: TestRef, b: TestRef): boolean =>
  a.key === b.key && a.value === b.value;

export const createResidualTree = (options: ResidualTreeOptions = {}): ResidualTree => {
  let root: ProgramNode | null = null;
  let offered: TestRef[] = [];
  const collapsed = new Set<string>();

  const element = document.createElement("div");
  element.className = "residual-tree";

  const rowElement = (row: OutlineRow, hasChildren: boolean, isOffered: boolean): HTMLElement => {
    const el = document.createElement(row.kind === "arm" && isOffered ? "button" : "div");
    if (el instanceof HTMLButtonElement) {
      el.type = "button";
    }
    el.className = `tree-row tree-row--${row.kind}${isOffered ? " tree-row--offered" : ""}`;
    el.setAttribute("data-row", row.path);
    el.setAttribute("data-depth", String(row.depth));
    el.setAttribute("data-kind", row.kind);
    el.style.setProperty("--tree-depth", String(row.depth));
    if (row.kind === "arm" && row.test) {
      el.setAttribute("data-key", row.test.key);
      el.setAttribute("data-value", row.test.value);
    }

    const toggle = document.createElement("span");
    toggle.className = "tree-toggle";
    if (hasChildren) {
      toggle.setAttribute("data-toggle", row.path);
      toggle.textContent = collapsed.has(row.path) ? "▸" : "▾";
    } else {
      toggle.textContent = "·";
    }
    el.appendChild(toggle);

    const label = document.createElement("span");
    label.className = "tree-label";
    label.textContent = row.label;
    el.appendChild(label);

    if (row.kind === "content" && row.payload) {
      const sub = document.createElement("span");
      sub.className = "tree-payload";
      sub.textContent = row.payload;
      el.appendChild(sub);
    }
    return el;
  };

  const renderNode = (n: ProgramNode, path: string, depth: number): void => {
    if (n.kind === "content") {
      element.appendChild(
        rowElement(
          { path, depth, kind: "content", label: n.ref, ref: n.ref, payload: n.payload },
          false,
          false,
        ),
      );
      return;
    }
    if (n.kind === "seq") {
      n.children.forEach((child, i) => renderNode(child, `${path}.s${i}`, depth));
      return;
    }
    n.arms.forEach((arm, i) => {
      const armPath = `${path}.${i}`;
      const test = { key: arm.test.key, value: arm.test.value };
      const isOffered = offered.some((t) => sameTest(t, test));
      element.appendChild(
        rowElement(
          { path: armPath, depth, kind: "arm", label: testLabel(arm.test), test },
          true,
          isOffered,
        ),
      );
      if (!collapsed.has(armPath)) {
        renderNode(arm.body, `${armPath}.b`, depth + 1);
      }
    });
  };

  const render = (): void => {
    element.innerHTML = "";
    if (root === null) {
      const empty = document.createElement("div");
      empty.className = "tree-empty";
      empty.textContent = "nothing here: every path was excluded";
      element.appendChild(empty);
      return;
    }
    renderNode(root, "r", 0);
  };

  const toggle = (path: string): void => {
    if (collapsed.has(path)) {
      collapsed.delete(path);
    } else {
      collapsed.add(path);
    }
    render();
  };

  element.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    if (!target) return;
    const toggleEl = target.closest<HTMLElement>("[data-toggle]");
    if (toggleEl && element.contains(toggleEl)) {
      event.stopPropagation();
      const path = toggleEl.getAttribute("data-toggle");
      if (path) toggle(path);
      return;
    }
    const rowEl = target.closest<HTMLElement>(".tree-row--offered");
    if (!rowEl || !element.contains(rowEl)) return;
    const key = rowEl.getAttribute("data-key");
    const value = rowEl.getAttribute("data-value");
    if (key && value) {
      options.onArmClick?.({ key, value });
    }
  });

  render();

  return {
    element,
    setRoot: (nextRoot, nextOffered) => {
      root = nextRoot;
      offered = nextOffered;
      render();
    },
    toggle,
  };
};
