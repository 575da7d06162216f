import { describe, expect, it } from "vitest";

import { applyFilters, flattenReport, paginate } from "../src/state.js";
import type { Report } from "../src/types.js";

function fixtureReport(): Report {
  return {
    run_id: "r1",
    created_at: "1970-01-01T00:00:00Z",
    prompts: [
      {
        record: {
          id: "p1",
          file: "bot.py",
          span: [0, 10],
          text: "You are a friendly secretary named KC.",
          holes: [],
          raw: '"You are a friendly secretary named KC."',
        },
        category: "uncategorized",
        bias: [
          {
            prompt_id: "p1",
            bias_type: "gender",
            explicit: false,
            prone: true,
            reasoning: "persona invites gendered assumptions",
            evaluable: true,
            rewrites: [{ text: "You are a friendly assistant named KC.", distance: 1 }],
            partial: false,
          },
          {
            prompt_id: "p1",
            bias_type: "race",
            explicit: false,
            prone: false,
            reasoning: "",
            evaluable: true,
            rewrites: [],
            partial: false,
          },
        ],
        injection: null,
        optimization: null,
      },
      {
        record: {
          id: "p2",
          file: "qa.py",
          span: [0, 10],
          text: "Use the context: {context}",
          holes: ["context"],
          raw: '"Use the context: {context}"',
        },
        category: "qa",
        bias: [],
        injection: {
          prompt_id: "p2",
          vulnerable: true,
          hole_results: { context: ["RO-06"] },
          tested_attacks: 24,
          trials_issued: 24,
          inconclusive: [],
          partial: false,
          hardened: { text: "Use ONLY the context: {context}", distance: 1 },
        },
        optimization: null,
      },
      {
        record: {
          id: "p3",
          file: "clean.py",
          span: [0, 10],
          text: "Translate: {src}",
          holes: ["src"],
          raw: '"Translate: {src}"',
        },
        category: "translation",
        bias: [],
        injection: {
          prompt_id: "p3",
          vulnerable: false,
          hole_results: { src: [] },
          tested_attacks: 24,
          trials_issued: 24,
          inconclusive: [],
          partial: false,
          hardened: null,
        },
        optimization: null,
      },
    ],
    config: {},
    budget: {},
  };
}

describe("flattenReport", () => {
  it("keeps only flagged verdicts", () => {
    const rows = flattenReport(fixtureReport());
    expect(rows).toHaveLength(2);
    expect(rows.map((r) => r.kind)).toEqual(["bias", "injection"]);
  });

  it("carries severity, reasoning, and rewrites", () => {
    const [bias, injection] = flattenReport(fixtureReport());
    expect(bias.severity).toBe("prone");
    expect(bias.reasoning).toContain("gendered assumptions");
    expect(bias.rewrites).toHaveLength(1);
    expect(injection.severity).toBe("vulnerable");
    expect(injection.detail).toBe("context");
    expect(injection.rewrites[0].text).toContain("ONLY");
  });

  it("all rows start pending", () => {
    expect(flattenReport(fixtureReport()).every((r) => r.status === "pending")).toBe(true);
  });
});

describe("applyFilters", () => {
  const rows = flattenReport(fixtureReport());

  it("kind filter keeps only that kind", () => {
    const only = applyFilters(rows, { kind: "injection" });
    expect(only).toHaveLength(1);
    expect(only[0].kind).toBe("injection");
  });

  it("filters compose conjunctively", () => {
    expect(applyFilters(rows, { kind: "bias", file: "bot" })).toHaveLength(1);
    expect(applyFilters(rows, { kind: "bias", file: "qa" })).toHaveLength(0);
  });

  it("no match yields an empty list, not an error", () => {
    expect(applyFilters(rows, { severity: "explicit" })).toEqual([]);
  });
});

describe("paginate", () => {
  const items = Array.from({ length: 23 }, (_, i) => i);

  it("slices pages and reports totals", () => {
    const page = paginate(items, 2, 10);
    expect(page.items).toEqual([10, 11, 12, 13, 14, 15, 16, 17, 18, 19]);
    expect(page.pages).toBe(3);
    expect(page.total).toBe(23);
  });

  it("clamps out-of-range pages", () => {
    expect(paginate(items, 99, 10).page).toBe(3);
    expect(paginate(items, 0, 10).page).toBe(1);
    expect(paginate([], 1, 10).pages).toBe(1);
  });
});
