import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, parseSseBlock } from "../src/api.js";
import { App } from "../src/app.js";
import type { Report } from "../src/types.js";

const REPORT: Report = {
  run_id: "r9",
  created_at: "1970-01-01T00:00:00Z",
  prompts: [
    {
      record: {
        id: "kc",
        file: "assistant_bot.py",
        span: [0, 10],
        text: "You are a friendly secretary named KC.",
        holes: [],
        raw: '"You are a friendly secretary named KC."',
      },
      category: "uncategorized",
      bias: [
        {
          prompt_id: "kc",
          bias_type: "gender",
          explicit: false,
          prone: true,
          reasoning: "The persona 'secretary' invites gendered assumptions about KC.",
          evaluable: true,
          rewrites: [
            { text: "You are a friendly administrative assistant named KC.", distance: 1 },
            { text: "You are a friendly office coordinator named KC.", distance: 1 },
          ],
          partial: false,
        },
      ],
      injection: null,
      optimization: null,
    },
    {
      record: {
        id: "vq",
        file: "qa.py",
        span: [0, 10],
        text: "Answer with the context: {context}",
        holes: ["context"],
        raw: '"Answer with the context: {context}"',
      },
      category: "qa",
      bias: [],
      injection: {
        prompt_id: "vq",
        vulnerable: true,
        hole_results: { context: ["RO-06"] },
        tested_attacks: 24,
        trials_issued: 24,
        inconclusive: [],
        partial: false,
        hardened: { text: "Answer ONLY with the context: {context}", distance: 1 },
      },
      optimization: null,
    },
  ],
  config: {},
  budget: {},
};

type FetchHandler = (url: string, init?: RequestInit) => Promise<Response> | Response;

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

let handlers: Record<string, FetchHandler>;

function installFetch() {
  vi.stubGlobal("fetch", (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0];
    const handler = handlers[`${init?.method ?? "GET"} ${path}`];
    if (!handler) throw new Error(`no handler for ${init?.method ?? "GET"} ${path}`);
    return Promise.resolve(handler(url, init));
  });
}

function sseResponse(events: object[]): Response {
  const payload = events.map((e) => `data: ${JSON.stringify(e)}\n\n`).join("");
  return new Response(payload, { status: 200, headers: { "Content-Type": "text/event-stream" } });
}

async function makeApp(): Promise<App> {
  const root = document.createElement("main");
  document.body.append(root);
  const app = new App(root, new ApiClient(""));
  await app.init();
  return app;
}

beforeEach(() => {
  document.body.innerHTML = "";
  handlers = {
    "GET /api/reports": () =>
      jsonResponse([{ run_id: "r9", created_at: "", prompts: 2, findings: 2 }]),
    "GET /api/reports/r9": () => jsonResponse(REPORT),
  };
  installFetch();
});

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("findings list", () => {
  it("renders the prone persona finding with its reasoning", async () => {
    const app = await makeApp();
    const rows = app.root.querySelectorAll(".finding-row");
    expect(rows).toHaveLength(2);
    expect(rows[0].textContent).toContain("bias");
    expect(rows[0].textContent).toContain("prone");
    app.selectFinding("kc:bias:gender");
    const detail = app.root.querySelector("#detail")!;
    expect(detail.textContent).toContain("invites gendered assumptions about KC");
  });

  it("kind filter shows only injection rows", async () => {
    const app = await makeApp();
    const select = app.root.querySelector("#filter-kind") as HTMLSelectElement;
    select.value = "injection";
    select.dispatchEvent(new Event("change"));
    const rows = app.root.querySelectorAll(".finding-row");
    expect(rows).toHaveLength(1);
    expect(rows[0].textContent).toContain("injection");
  });

  it("filters that match nothing render the empty state", async () => {
    const app = await makeApp();
    const select = app.root.querySelector("#filter-severity") as HTMLSelectElement;
    select.value = "explicit";
    select.dispatchEvent(new Event("change"));
    expect(app.root.querySelector(".finding-row")).toBeNull();
    expect(app.root.querySelector("#findings .empty-state")!.textContent).toContain("no findings");
  });

  it("hole markers are highlighted one to one", async () => {
    const app = await makeApp();
    app.selectFinding("vq:injection");
    const holes = app.root.querySelectorAll("#detail .original .hole");
    expect(holes).toHaveLength(1);
    expect(holes[0].getAttribute("data-hole")).toBe("context");
  });

  it("shows a connection banner when the service is down", async () => {
    handlers["GET /api/reports"] = () => {
      throw new TypeError("fetch failed");
    };
    const app = await makeApp();
    const banner = app.root.querySelector("#banner")!;
    expect(banner.className).toContain("error");
    expect(banner.textContent).toContain("cannot reach");
  });
});

describe("review and apply", () => {
  it("applying a rewrite flips the row to applied and disables the button", async () => {
    handlers["POST /api/fixes"] = () =>
      jsonResponse({
        prompt_id: "kc",
        chosen_rewrite: "You are a friendly administrative assistant named KC.",
        file: "assistant_bot.py",
        span: [0, 10],
        status: "applied",
        backup: "assistant_bot.py.bak",
      });
    const app = await makeApp();
    app.selectFinding("kc:bias:gender");
    const diff = app.root.querySelector("#detail .rewrite .diff")!;
    expect(diff.querySelector(".removed")!.textContent).toContain("secretary");
    expect(diff.querySelector(".added")!.textContent).toContain("administrative assistant");
    const button = app.root.querySelector(".apply-button") as HTMLButtonElement;
    expect(button.disabled).toBe(false);
    await app.confirmApply("kc:bias:gender", 0);
    expect(app.rows.find((r) => r.key === "kc:bias:gender")!.status).toBe("applied");
    const after = app.root.querySelector(".apply-button") as HTMLButtonElement;
    expect(after.disabled).toBe(true);
    expect(app.root.querySelector(".status-applied")).not.toBeNull();
  });

  it("a second apply is a client-side no-op once not pending", async () => {
    let calls = 0;
    handlers["POST /api/fixes"] = () => {
      calls += 1;
      return jsonResponse({
        prompt_id: "kc",
        chosen_rewrite: "x",
        file: "f",
        span: [0, 1],
        status: "applied",
        backup: null,
      });
    };
    const app = await makeApp();
    app.selectFinding("kc:bias:gender");
    await app.confirmApply("kc:bias:gender", 0);
    await app.confirmApply("kc:bias:gender", 0);
    expect(calls).toBe(1);
  });

  it("a 409 renders the conflict dialog and leaves status conflicted", async () => {
    handlers["POST /api/fixes"] = () =>
      jsonResponse({ detail: "source file drifted; fix conflicted" }, 409);
    const app = await makeApp();
    app.selectFinding("kc:bias:gender");
    await app.confirmApply("kc:bias:gender", 0);
    const dialog = app.root.querySelector("#conflict-dialog")!;
    expect(dialog).not.toBeNull();
    expect(dialog.textContent).toContain("drifted");
    expect(app.rows.find((r) => r.key === "kc:bias:gender")!.status).toBe("conflicted");
    expect(app.root.querySelector(".status-conflicted")).not.toBeNull();
  });
});

describe("ad-hoc analysis", () => {
  it("submit is disabled for empty text and enabled otherwise", async () => {
    const app = await makeApp();
    const submit = app.root.querySelector("#adhoc-submit") as HTMLButtonElement;
    const text = app.root.querySelector("#adhoc-text") as HTMLTextAreaElement;
    expect(submit.disabled).toBe(true);
    text.value = "Check this prompt {x}";
    text.dispatchEvent(new Event("input"));
    expect(submit.disabled).toBe(false);
    text.value = "   ";
    text.dispatchEvent(new Event("input"));
    expect(submit.disabled).toBe(true);
  });

  it("a scripted 3-event progress stream renders 3 ticks", async () => {
    handlers["GET /api/events"] = () =>
      sseResponse([
        { stage: "start", pct: 0 },
        { stage: "patching", pct: 10 },
        { stage: "done", pct: 100 },
      ]);
    handlers["POST /api/analyze"] = () =>
      jsonResponse({
        prompt_id: "adhoc1",
        text: "Check this {x}",
        holes: ["x"],
        bias: [],
        injection: null,
        partial: false,
      });
    const app = await makeApp();
    await app.runAdhoc("Check this {x}", ["bias"]);
    const ticks = app.root.querySelectorAll("#adhoc-progress .tick");
    expect(ticks).toHaveLength(3);
    expect(app.root.querySelector("#adhoc-result .empty-state")!.textContent).toContain(
      "no findings",
    );
  });

  it("budget-exceeded partial results surface as a toast", async () => {
    handlers["GET /api/events"] = () => sseResponse([{ stage: "done" }]);
    handlers["POST /api/analyze"] = () =>
      jsonResponse({
        prompt_id: "adhoc2",
        text: "p",
        holes: [],
        bias: [],
        injection: null,
        partial: true,
      });
    const app = await makeApp();
    await app.runAdhoc("some prompt", ["bias"]);
    const toast = app.root.querySelector("#toast")!;
    expect(toast.className).toContain("visible");
    expect(toast.textContent).toContain("partial");
  });
});

describe("sse parsing", () => {
  it("parses data lines and skips junk", () => {
    const events = parseSseBlock('data: {"stage":"a"}\n: comment\ndata: nope');
    expect(events).toEqual([{ stage: "a" }]);
  });
});
