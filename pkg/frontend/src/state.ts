// Flatten a report into triage rows and apply the table controls.
// Pure functions: the app shell owns the mutable state.

import type { FindingKind, FindingRow, Report, Severity } from "./types.js";

export interface Filters {
  kind?: FindingKind | "";
  severity?: Severity | "";
  file?: string;
}

export function flattenReport(report: Report): FindingRow[] {
  const rows: FindingRow[] = [];
  for (const entry of report.prompts) {
    const record = entry.record;
    for (const b of entry.bias) {
      if (!b.explicit && !b.prone) continue;
      rows.push({
        key: `${record.id}:bias:${b.bias_type}`,
        promptId: record.id,
        file: record.file,
        promptText: record.text,
        holes: record.holes,
        kind: "bias",
        severity: b.explicit ? "explicit" : "prone",
        detail: b.bias_type,
        reasoning: b.reasoning,
        rewrites: b.rewrites,
        rewriteKind: "bias",
        status: "pending",
      });
    }
    const inj = entry.injection;
    if (inj && inj.vulnerable) {
      const holes = Object.entries(inj.hole_results)
        .filter(([, ids]) => ids.length > 0)
        .map(([hole]) => hole)
        .sort();
      rows.push({
        key: `${record.id}:injection`,
        promptId: record.id,
        file: record.file,
        promptText: record.text,
        holes: record.holes,
        kind: "injection",
        severity: "vulnerable",
        detail: holes.join(", "),
        reasoning:
          `Successful attacks through: ${holes.join(", ")} ` +
          `(${inj.trials_issued} trials over ${inj.tested_attacks} attacks)`,
        rewrites: inj.hardened ? [inj.hardened] : [],
        rewriteKind: "injection",
        status: "pending",
      });
    }
  }
  return rows;
}

export function applyFilters(rows: FindingRow[], filters: Filters): FindingRow[] {
  return rows.filter((row) => {
    if (filters.kind && row.kind !== filters.kind) return false;
    if (filters.severity && row.severity !== filters.severity) return false;
    if (filters.file && !row.file.toLowerCase().includes(filters.file.toLowerCase()))
      return false;
    return true;
  });
}

export interface Page<T> {
  items: T[];
  page: number;
  pages: number;
  total: number;
}

export function paginate<T>(items: T[], page: number, perPage: number): Page<T> {
  const pages = Math.max(1, Math.ceil(items.length / perPage));
  const clamped = Math.min(Math.max(1, page), pages);
  const start = (clamped - 1) * perPage;
  return {
    items: items.slice(start, start + perPage),
    page: clamped,
    pages,
    total: items.length,
  };
}
