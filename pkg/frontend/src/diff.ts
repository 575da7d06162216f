// Word-level diff for the side-by-side rewrite view. Display only: the
// server stays authoritative for every applied change.

export type DiffOp = "same" | "del" | "ins";

export interface DiffSegment {
  op: DiffOp;
  text: string;
}

function splitWords(text: string): string[] {
  // words plus the whitespace that follows them, so joins are lossless
  return text.match(/\S+\s*|\s+/g) ?? [];
}

export function diffWords(before: string, after: string): DiffSegment[] {
  const a = splitWords(before);
  const b = splitWords(after);
  // classic LCS table; prompts are short so O(n*m) is fine
  const n = a.length;
  const m = b.length;
  const lcs: number[][] = Array.from({ length: n + 1 }, () => new Array(m + 1).fill(0));
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      lcs[i][j] =
        a[i].trim() === b[j].trim()
          ? lcs[i + 1][j + 1] + 1
          : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  const out: DiffSegment[] = [];
  const push = (op: DiffOp, text: string) => {
    const last = out[out.length - 1];
    if (last && last.op === op) {
      last.text += text;
    } else if (text) {
      out.push({ op, text });
    }
  };
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (a[i].trim() === b[j].trim()) {
      push("same", b[j]);
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      push("del", a[i]);
      i++;
    } else {
      push("ins", b[j]);
      j++;
    }
  }
  while (i < n) push("del", a[i++]);
  while (j < m) push("ins", b[j++]);
  return out;
}

export function changedWordCount(segments: DiffSegment[]): number {
  return segments
    .filter((s) => s.op !== "same")
    .reduce((acc, s) => acc + (s.text.trim() ? s.text.trim().split(/\s+/).length : 0), 0);
}
