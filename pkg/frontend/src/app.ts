// Review dashboard shell: findings triage, rewrite diff + apply, ad-hoc
// analysis with streamed progress. All state transitions that matter
// (applied / conflicted) come from the service's responses.

import { ApiClient, ServiceUnreachable } from "./api.js";
import { diffWords } from "./diff.js";
import { segmentPrompt } from "./holes.js";
import { applyFilters, flattenReport, paginate, type Filters } from "./state.js";
import type { AnalyzeResult, FindingRow, ProgressEvent, Report } from "./types.js";

const PER_PAGE = 10;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

export function renderPromptText(text: string): HTMLElement {
  const container = el("span", { class: "prompt-text" });
  for (const seg of segmentPrompt(text)) {
    if (seg.kind === "hole") {
      container.append(el("span", { class: "hole", "data-hole": seg.value }, `{${seg.value}}`));
    } else {
      container.append(seg.value);
    }
  }
  return container;
}

export function renderDiff(before: string, after: string): HTMLElement {
  const container = el("span", { class: "diff" });
  for (const seg of diffWords(before, after)) {
    const cls = seg.op === "same" ? "same" : seg.op === "del" ? "removed" : "added";
    container.append(el("span", { class: cls }, seg.text));
  }
  return container;
}

export class App {
  rows: FindingRow[] = [];
  filters: Filters = { kind: "", severity: "", file: "" };
  page = 1;
  selectedKey: string | null = null;
  report: Report | null = null;
  applying = false;

  constructor(
    readonly root: HTMLElement,
    readonly api: ApiClient,
  ) {
    this.root.innerHTML = "";
    this.root.append(
      el("div", { id: "banner", class: "banner hidden" }),
      el("div", { id: "toast", class: "toast hidden" }),
      el("header", {}, el("h1", {}, "prompt review"), el("span", { id: "report-meta" })),
      this.buildFilterBar(),
      el("div", { id: "findings" }),
      el("div", { id: "detail" }),
      this.buildAdhocPanel(),
    );
  }

  // ---- data loading -------------------------------------------------------

  async init(): Promise<void> {
    try {
      const summaries = await this.api.listReports();
      if (summaries.length === 0) {
        this.showBanner("no reports in the store yet", false);
        this.renderFindings();
        return;
      }
      const latest = summaries[summaries.length - 1];
      await this.loadReport(latest.run_id);
    } catch (err) {
      if (err instanceof ServiceUnreachable) {
        this.showBanner("cannot reach the review service", true);
        return;
      }
      throw err;
    }
  }

  async loadReport(runId: string): Promise<void> {
    this.report = await this.api.getReport(runId);
    this.rows = flattenReport(this.report);
    const meta = this.root.querySelector("#report-meta")!;
    meta.textContent = `report ${this.report.run_id} — ${this.rows.length} findings`;
    this.renderFindings();
  }

  // ---- findings table -----------------------------------------------------

  private buildFilterBar(): HTMLElement {
    const kind = el("select", { id: "filter-kind" });
    kind.append(
      el("option", { value: "" }, "all kinds"),
      el("option", { value: "bias" }, "bias"),
      el("option", { value: "injection" }, "injection"),
    );
    const severity = el("select", { id: "filter-severity" });
    severity.append(
      el("option", { value: "" }, "all severities"),
      el("option", { value: "explicit" }, "explicit"),
      el("option", { value: "prone" }, "prone"),
      el("option", { value: "vulnerable" }, "vulnerable"),
    );
    const file = el("input", { id: "filter-file", placeholder: "filter by file" });
    const onChange = () => {
      this.filters = {
        kind: (kind as HTMLSelectElement).value as Filters["kind"],
        severity: (severity as HTMLSelectElement).value as Filters["severity"],
        file: (file as HTMLInputElement).value,
      };
      this.page = 1;
      this.renderFindings();
    };
    kind.addEventListener("change", onChange);
    severity.addEventListener("change", onChange);
    file.addEventListener("input", onChange);
    return el("div", { class: "filters" }, kind, severity, file);
  }

  renderFindings(): void {
    const host = this.root.querySelector("#findings")!;
    host.innerHTML = "";
    const filtered = applyFilters(this.rows, this.filters);
    if (filtered.length === 0) {
      host.append(el("div", { class: "empty-state" }, "no findings match the current filters"));
      return;
    }
    const page = paginate(filtered, this.page, PER_PAGE);
    const table = el("table", { class: "findings-table" });
    table.append(
      el(
        "tr",
        {},
        el("th", {}, "kind"),
        el("th", {}, "severity"),
        el("th", {}, "detail"),
        el("th", {}, "file"),
        el("th", {}, "status"),
      ),
    );
    for (const row of page.items) {
      const tr = el(
        "tr",
        { class: `finding-row ${row.key === this.selectedKey ? "selected" : ""}`, "data-key": row.key },
        el("td", {}, row.kind),
        el("td", {}, row.severity),
        el("td", {}, row.detail),
        el("td", {}, row.file),
        el("td", { class: `status status-${row.status}` }, row.status),
      );
      tr.addEventListener("click", () => this.selectFinding(row.key));
      table.append(tr);
    }
    host.append(table);
    const pager = el(
      "div",
      { class: "pager" },
      el("span", {}, `page ${page.page}/${page.pages} — ${page.total} findings`),
    );
    if (page.pages > 1) {
      const prev = el("button", { id: "page-prev" }, "prev");
      const next = el("button", { id: "page-next" }, "next");
      prev.addEventListener("click", () => {
        this.page = Math.max(1, this.page - 1);
        this.renderFindings();
      });
      next.addEventListener("click", () => {
        this.page = Math.min(page.pages, this.page + 1);
        this.renderFindings();
      });
      pager.append(prev, next);
    }
    host.append(pager);
  }

  // ---- detail + apply -----------------------------------------------------

  selectFinding(key: string): void {
    this.selectedKey = key;
    this.renderFindings();
    this.renderDetail();
  }

  private rowByKey(key: string): FindingRow | undefined {
    return this.rows.find((r) => r.key === key);
  }

  renderDetail(): void {
    const host = this.root.querySelector("#detail")!;
    host.innerHTML = "";
    const row = this.selectedKey ? this.rowByKey(this.selectedKey) : undefined;
    if (!row) return;
    const panel = el("div", { class: "detail-panel" });
    panel.append(
      el("h2", {}, `${row.kind}: ${row.detail}`),
      el("div", { class: "original" }, renderPromptText(row.promptText)),
      el("p", { class: "reasoning" }, row.reasoning),
    );
    if (row.rewrites.length === 0) {
      panel.append(el("div", { class: "empty-state" }, "no rewrites available"));
    }
    row.rewrites.forEach((rewrite, index) => {
      const disabled = row.status !== "pending" || this.applying;
      const button = el(
        "button",
        { class: "apply-button", "data-index": String(index) },
        row.status === "applied" ? "applied" : "apply this rewrite",
      ) as HTMLButtonElement;
      button.disabled = disabled;
      button.addEventListener("click", () => void this.confirmApply(row.key, index));
      panel.append(
        el(
          "div",
          { class: "rewrite", "data-distance": String(rewrite.distance) },
          el("div", { class: "rewrite-meta" }, `rewrite #${index + 1} (distance ${rewrite.distance})`),
          renderDiff(row.promptText, rewrite.text),
          button,
        ),
      );
    });
    host.append(panel);
  }

  async confirmApply(key: string, rewriteIndex: number): Promise<void> {
    const row = this.rowByKey(key);
    if (!row || row.status !== "pending" || this.applying) return;
    this.applying = true;
    this.renderDetail(); // buttons disable while the request is in flight
    try {
      const outcome = await this.api.applyFix(row.promptId, rewriteIndex, row.rewriteKind);
      if (outcome.ok) {
        row.status = outcome.fix.status; // server-authoritative
      } else if (outcome.status === 409) {
        row.status = "conflicted";
        this.showConflictDialog(row, outcome.detail);
      } else {
        this.showToast(`apply failed: ${outcome.detail}`);
      }
    } finally {
      this.applying = false;
      this.renderFindings();
      this.renderDetail();
    }
  }

  showConflictDialog(row: FindingRow, detail: string): void {
    const existing = this.root.querySelector("#conflict-dialog");
    existing?.remove();
    const dialog = el(
      "div",
      { id: "conflict-dialog", class: "dialog" },
      el("h3", {}, "fix conflicted"),
      el("p", {}, `${row.file}: ${detail}`),
      el("p", {}, "the source file changed since this report; re-analyze to refresh it"),
    );
    const reanalyze = el("button", { id: "reanalyze" }, "re-analyze prompt");
    reanalyze.addEventListener("click", () => {
      void this.runAdhoc(row.promptText, ["bias", "injection"]);
      dialog.remove();
    });
    const close = el("button", { id: "dialog-close" }, "close");
    close.addEventListener("click", () => dialog.remove());
    dialog.append(reanalyze, close);
    this.root.append(dialog);
  }

  // ---- ad-hoc analysis ----------------------------------------------------

  private buildAdhocPanel(): HTMLElement {
    const text = el("textarea", { id: "adhoc-text", placeholder: "paste a prompt to analyze" });
    const bias = el("input", { type: "checkbox", id: "check-bias", checked: "" });
    const injection = el("input", { type: "checkbox", id: "check-injection", checked: "" });
    const submit = el("button", { id: "adhoc-submit" }, "analyze") as HTMLButtonElement;
    submit.disabled = true;
    text.addEventListener("input", () => {
      submit.disabled = (text as HTMLTextAreaElement).value.trim() === "";
    });
    submit.addEventListener("click", () => {
      const checks: string[] = [];
      if ((bias as HTMLInputElement).checked) checks.push("bias");
      if ((injection as HTMLInputElement).checked) checks.push("injection");
      void this.runAdhoc((text as HTMLTextAreaElement).value, checks);
    });
    return el(
      "div",
      { id: "adhoc", class: "adhoc" },
      el("h2", {}, "analyze a prompt"),
      text,
      el("label", {}, bias, "bias"),
      el("label", {}, injection, "injection"),
      submit,
      el("div", { id: "adhoc-progress" }),
      el("div", { id: "adhoc-result" }),
    );
  }

  async runAdhoc(text: string, checks: string[]): Promise<AnalyzeResult | null> {
    if (!text.trim()) return null;
    const progressHost = this.root.querySelector("#adhoc-progress")!;
    progressHost.innerHTML = "";
    const ticks = el("ul", { class: "progress-ticks" });
    progressHost.append(ticks);
    const onEvent = (event: ProgressEvent) => {
      ticks.append(el("li", { class: "tick" }, `${event.stage} ${event.detail ?? ""}`));
    };
    const streaming = this.api
      .streamEvents(onEvent, { maxEvents: 32, timeoutS: 15 })
      .catch(() => []);
    let result: AnalyzeResult;
    try {
      result = await this.api.analyze(text, checks);
    } catch (err) {
      this.showToast(`analysis failed: ${String(err)}`);
      return null;
    } finally {
      await Promise.race([streaming, new Promise((r) => setTimeout(r, 50))]);
    }
    if (result.partial) {
      this.showToast("budget exceeded: showing partial results");
    }
    this.renderAdhocResult(result);
    return result;
  }

  renderAdhocResult(result: AnalyzeResult): void {
    const host = this.root.querySelector("#adhoc-result")!;
    host.innerHTML = "";
    const fake: Report = {
      run_id: "adhoc",
      created_at: "",
      prompts: [
        {
          record: {
            id: result.prompt_id,
            file: "(ad-hoc)",
            span: [0, 1],
            text: result.text,
            holes: result.holes,
            raw: result.text,
          },
          category: null,
          bias: result.bias,
          injection: result.injection,
          optimization: null,
        },
      ],
      config: {},
      budget: {},
    };
    const rows = flattenReport(fake);
    if (rows.length === 0) {
      host.append(el("div", { class: "empty-state" }, "no findings"));
      return;
    }
    for (const row of rows) {
      host.append(
        el(
          "div",
          { class: `adhoc-finding ${row.kind}` },
          el("strong", {}, `${row.kind} (${row.severity}) ${row.detail}`),
          el("p", {}, row.reasoning),
        ),
      );
    }
  }

  // ---- chrome -------------------------------------------------------------

  showBanner(message: string, isError: boolean): void {
    const banner = this.root.querySelector("#banner")!;
    banner.textContent = message;
    banner.className = `banner ${isError ? "error" : "info"}`;
  }

  showToast(message: string): void {
    const toast = this.root.querySelector("#toast")!;
    toast.textContent = message;
    toast.className = "toast visible";
  }
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  const app = new App(root, new ApiClient(baseUrl));
  void app.init();
  return app;
}
