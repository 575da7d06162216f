// Split canonical prompt text into literal and hole segments so holes can
// be highlighted. Escaped braces ({{ and }}) render as literal braces.

export interface TextSegment {
  kind: "text" | "hole";
  value: string; // hole name for holes, literal text otherwise
}

const HOLE_RE = /^[A-Za-z_][A-Za-z0-9_]*$/;

export function segmentPrompt(text: string): TextSegment[] {
  const out: TextSegment[] = [];
  let literal = "";
  const flush = () => {
    if (literal) {
      out.push({ kind: "text", value: literal });
      literal = "";
    }
  };
  let i = 0;
  while (i < text.length) {
    if (text.startsWith("{{", i)) {
      literal += "{";
      i += 2;
      continue;
    }
    if (text.startsWith("}}", i)) {
      literal += "}";
      i += 2;
      continue;
    }
    if (text[i] === "{") {
      const close = text.indexOf("}", i + 1);
      const name = close === -1 ? "" : text.slice(i + 1, close);
      if (close !== -1 && HOLE_RE.test(name)) {
        flush();
        out.push({ kind: "hole", value: name });
        i = close + 1;
        continue;
      }
    }
    literal += text[i];
    i += 1;
  }
  flush();
  return out;
}

export function distinctHoleNames(segments: TextSegment[]): string[] {
  const seen: string[] = [];
  for (const s of segments) {
    if (s.kind === "hole" && !seen.includes(s.value)) seen.push(s.value);
  }
  return seen;
}
