// Shapes of the JSON the review service emits. These mirror the report
// artifact exactly; the UI never derives verdicts of its own.

export interface PromptRecord {
  id: string;
  file: string;
  span: [number, number];
  text: string;
  holes: string[];
  raw: string;
}

export interface Rewrite {
  text: string;
  distance: number;
}

export interface BiasEntry {
  prompt_id: string | null;
  bias_type: string;
  explicit: boolean;
  prone: boolean;
  reasoning: string;
  evaluable: boolean;
  rewrites: Rewrite[];
  partial: boolean;
}

export interface InjectionEntry {
  prompt_id: string | null;
  vulnerable: boolean;
  hole_results: Record<string, string[]>;
  tested_attacks: number;
  trials_issued: number;
  inconclusive: [string, string][];
  partial: boolean;
  hardened: Rewrite | null;
}

export interface PromptEntry {
  record: PromptRecord;
  category: string | null;
  bias: BiasEntry[];
  injection: InjectionEntry | null;
  optimization: unknown;
}

export interface Report {
  run_id: string;
  created_at: string;
  prompts: PromptEntry[];
  config: Record<string, unknown>;
  budget: Record<string, unknown>;
}

export interface ReportSummary {
  run_id: string;
  created_at: string;
  prompts: number;
  findings: number;
}

export interface FixResult {
  prompt_id: string;
  chosen_rewrite: string;
  file: string;
  span: [number, number];
  status: "pending" | "applied" | "conflicted";
  backup: string | null;
}

export interface AnalyzeResult {
  prompt_id: string;
  text: string;
  holes: string[];
  bias: BiasEntry[];
  injection: InjectionEntry | null;
  partial: boolean;
}

export interface ProgressEvent {
  stage: string;
  detail?: string;
  pct?: number;
}

export type FindingKind = "bias" | "injection";
export type Severity = "explicit" | "prone" | "vulnerable";
export type FixStatus = "pending" | "applied" | "conflicted";

// One row of the triage table: a single flagged verdict with its rewrites.
export interface FindingRow {
  key: string;
  promptId: string;
  file: string;
  promptText: string;
  holes: string[];
  kind: FindingKind;
  severity: Severity;
  detail: string; // bias type or vulnerable hole list
  reasoning: string;
  rewrites: Rewrite[];
  rewriteKind: FindingKind; // which /api/fixes kind the rewrites belong to
  status: FixStatus;
}
