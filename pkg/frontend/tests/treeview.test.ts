import { describe, expect, it, vi } from "vitest";

import type { ChainNode, ProgramNode, SeqNode } from "../src/api.js";
import { createResidualTree, outline, testLabel } from "../src/treeview.js";

const content = (ref: string, payload = ""): ProgramNode => ({ kind: "content", ref, payload });
const arm = (key: string, body: ProgramNode, value = "true") => ({ test: { key, value }, body });
const chain = (...arms: ReturnType<typeof arm>[]): ChainNode => ({ kind: "chain", arms });
const seq = (...children: ProgramNode[]): SeqNode => ({ kind: "seq", children });

// Two-level sample: a branch chain whose Sen arm nests a party chain.
const sample = chain(
  arm("Sen", chain(arm("Dem", content("sen-dem")), arm("Rep", content("sen-rep")))),
  arm("Repr", content("repr-all", "everything about the House")),
);

describe("testLabel", () => {
  it("renders flags bare and categorical tests as key=value", () => {
    expect(testLabel({ key: "Sen", value: "true" })).toBe("Sen");
    expect(testLabel({ key: "State", value: "CA" })).toBe("State=CA");
  });
});

describe("outline", () => {
  it("lists one row per arm and per content leaf, depth-first", () => {
    expect(outline(sample).map((r) => [r.depth, r.kind, r.label])).toEqual([
      [0, "arm", "Sen"],
      [1, "arm", "Dem"],
      [2, "content", "sen-dem"],
      [1, "arm", "Rep"],
      [2, "content", "sen-rep"],
      [0, "arm", "Repr"],
      [1, "content", "repr-all"],
    ]);
  });

  it("keeps seq children at their parent depth", () => {
    const node = seq(content("a"), chain(arm("K", content("b"))));
    expect(outline(node).map((r) => [r.depth, r.kind, r.label])).toEqual([
      [0, "content", "a"],
      [0, "arm", "K"],
      [1, "content", "b"],
    ]);
  });

  it("is empty for a void root", () => {
    expect(outline(null)).toEqual([]);
  });

  it("assigns distinct stable paths", () => {
    const rows = outline(sample);
    expect(new Set(rows.map((r) => r.path)).size).toBe(rows.length);
    expect(rows[0].path).toBe("r.0");
    expect(rows[2].path).toBe("r.0.b.0.b");
  });
});

describe("createResidualTree", () => {
  const domRows = (el: HTMLElement) =>
    Array.from(el.querySelectorAll<HTMLElement>("[data-row]")).map((row) => ({
      depth: Number(row.getAttribute("data-depth")),
      kind: row.getAttribute("data-kind"),
      label: row.querySelector(".tree-label")?.textContent,
    }));

  it("renders exactly the outline when fully expanded", () => {
    const tree = createResidualTree();
    tree.setRoot(sample, []);
    expect(domRows(tree.element)).toEqual(
      outline(sample).map((r) => ({ depth: r.depth, kind: r.kind, label: r.label })),
    );
  });

  it("marks offered arms as buttons and the rest as plain rows", () => {
    const tree = createResidualTree();
    tree.setRoot(sample, [{ key: "Sen", value: "true" }, { key: "Repr", value: "true" }]);
    const sen = tree.element.querySelector('[data-key="Sen"]');
    const dem = tree.element.querySelector('[data-key="Dem"]');
    expect(sen).toBeInstanceOf(HTMLButtonElement);
    expect(dem).toBeInstanceOf(HTMLDivElement);
  });

  it("reports clicks on offered arms only", () => {
    const onArmClick = vi.fn();
    const tree = createResidualTree({ onArmClick });
    document.body.appendChild(tree.element);
    tree.setRoot(sample, [{ key: "Sen", value: "true" }]);

    tree.element.querySelector<HTMLElement>('[data-key="Dem"] .tree-label')?.click();
    expect(onArmClick).not.toHaveBeenCalled();

    tree.element.querySelector<HTMLElement>('[data-key="Sen"] .tree-label')?.click();
    expect(onArmClick).toHaveBeenCalledWith({ key: "Sen", value: "true" });
    tree.element.remove();
  });

  it("collapses and re-expands a subtree via its toggle", () => {
    const tree = createResidualTree();
    document.body.appendChild(tree.element);
    tree.setRoot(sample, []);
    expect(tree.element.querySelectorAll("[data-row]").length).toBe(7);

    tree.element.querySelector<HTMLElement>('[data-toggle="r.0"]')?.click();
    const afterCollapse = domRows(tree.element).map((r) => r.label);
    expect(afterCollapse).toEqual(["Sen", "Repr", "repr-all"]);

    tree.element.querySelector<HTMLElement>('[data-toggle="r.0"]')?.click();
    expect(tree.element.querySelectorAll("[data-row]").length).toBe(7);
    tree.element.remove();
  });

  it("shows an empty note for a void root", () => {
    const tree = createResidualTree();
    tree.setRoot(null, []);
    expect(tree.element.querySelector(".tree-empty")).not.toBeNull();
    expect(tree.element.querySelectorAll("[data-row]").length).toBe(0);
  });

  it("shows the payload on content rows", () => {
    const tree = createResidualTree();
    tree.setRoot(sample, []);
    const payloads = Array.from(tree.element.querySelectorAll(".tree-payload")).map(
      (el) => el.textContent,
    );
    expect(payloads).toEqual(["everything about the House"]);
  });
});
