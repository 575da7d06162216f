import { describe, expect, it } from "vitest";

import { changedWordCount, diffWords } from "../src/diff.js";

function render(segments: ReturnType<typeof diffWords>): string {
  return segments
    .map((s) => (s.op === "same" ? s.text : s.op === "del" ? `[-${s.text.trim()}-]` : `[+${s.text.trim()}+]`))
    .join("");
}

describe("diffWords", () => {
  it("identical strings produce one same segment", () => {
    const segments = diffWords("keep it all", "keep it all");
    expect(segments).toHaveLength(1);
    expect(segments[0].op).toBe("same");
  });

  it("highlights a pronoun swap as del+ins", () => {
    const before = "write a short summary of his career path";
    const after = "write a short summary of their career path";
    const segments = diffWords(before, after);
    const dels = segments.filter((s) => s.op === "del").map((s) => s.text.trim());
    const inss = segments.filter((s) => s.op === "ins").map((s) => s.text.trim());
    expect(dels).toEqual(["his"]);
    expect(inss).toEqual(["their"]);
  });

  it("handles pure insertion and pure deletion", () => {
    expect(render(diffWords("a b", "a b c"))).toBe("a b [+c+]");
    expect(render(diffWords("a b c", "a b"))).toContain("[-c-]");
  });

  it("reconstructs both sides losslessly", () => {
    const before = "one two three four five";
    const after = "one 2 three five six";
    const segments = diffWords(before, after);
    const rebuiltBefore = segments
      .filter((s) => s.op !== "ins")
      .map((s) => s.text)
      .join("");
    const rebuiltAfter = segments
      .filter((s) => s.op !== "del")
      .map((s) => s.text)
      .join("");
    expect(rebuiltBefore.trim()).toBe(before);
    expect(rebuiltAfter.trim()).toBe(after);
  });

  it("counts changed words", () => {
    const segments = diffWords("the cat sat", "the dog sat today");
    expect(changedWordCount(segments)).toBe(3); // cat, dog, today
  });

  it("empty sides", () => {
    expect(diffWords("", "")).toEqual([]);
    expect(diffWords("", "new text")[0].op).toBe("ins");
    expect(diffWords("old text", "")[0].op).toBe("del");
  });
});
