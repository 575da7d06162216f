// Typed client for the review service. Every verdict shown in the UI
// comes from these calls; nothing is computed client-side.

import type {
  AnalyzeResult,
  FixResult,
  ProgressEvent,
  Report,
  ReportSummary,
} from "./types.js";

export type ApplyOutcome =
  | { ok: true; fix: FixResult }
  | { ok: false; status: number; detail: string };

export class ServiceUnreachable extends Error {}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path);
    } catch (err) {
      throw new ServiceUnreachable(String(err));
    }
    if (!resp.ok) throw new Error(`${path} -> ${resp.status}`);
    return (await resp.json()) as T;
  }

  listReports(): Promise<ReportSummary[]> {
    return this.get<ReportSummary[]>("/api/reports");
  }

  getReport(runId: string): Promise<Report> {
    return this.get<Report>(`/api/reports/${encodeURIComponent(runId)}`);
  }

  async analyze(promptText: string, checks: string[]): Promise<AnalyzeResult> {
    const resp = await fetch(this.baseUrl + "/api/analyze", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ prompt_text: promptText, checks }),
    });
    if (!resp.ok) throw new Error(`analyze -> ${resp.status}`);
    return (await resp.json()) as AnalyzeResult;
  }

  async applyFix(
    promptId: string,
    rewriteIndex: number,
    kind: "bias" | "injection",
  ): Promise<ApplyOutcome> {
    const resp = await fetch(this.baseUrl + "/api/fixes", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ prompt_id: promptId, rewrite_index: rewriteIndex, kind }),
    });
    if (resp.ok) {
      return { ok: true, fix: (await resp.json()) as FixResult };
    }
    let detail = `HTTP ${resp.status}`;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    return { ok: false, status: resp.status, detail };
  }

  /** Stream progress events; resolves once maxEvents arrive or the stream ends. */
  async streamEvents(
    onEvent: (event: ProgressEvent) => void,
    opts: { maxEvents?: number; timeoutS?: number } = {},
  ): Promise<ProgressEvent[]> {
    const params = new URLSearchParams();
    if (opts.maxEvents) params.set("max_events", String(opts.maxEvents));
    params.set("timeout_s", String(opts.timeoutS ?? 10));
    const resp = await fetch(this.baseUrl + `/api/events?${params}`);
    if (!resp.ok || !resp.body) throw new Error(`events -> ${resp.status}`);
    const events: ProgressEvent[] = [];
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let idx: number;
      while ((idx = buffer.indexOf("\n\n")) !== -1) {
        const block = buffer.slice(0, idx);
        buffer = buffer.slice(idx + 2);
        for (const parsed of parseSseBlock(block)) {
          events.push(parsed);
          onEvent(parsed);
        }
      }
      if (opts.maxEvents && events.length >= opts.maxEvents) {
        await reader.cancel();
        break;
      }
    }
    return events;
  }
}

export function parseSseBlock(block: string): ProgressEvent[] {
  const out: ProgressEvent[] = [];
  for (const line of block.split("\n")) {
    if (!line.startsWith("data: ")) continue;
    try {
      out.push(JSON.parse(line.slice("data: ".length)) as ProgressEvent);
    } catch {
      // not JSON: ignore, the stream may carry comments/heartbeats
    }
  }
  return out;
}
