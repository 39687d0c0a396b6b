/** Wire types mirroring the triage service's JSON API. */

export interface AlertSummary {
  alert_id: string;
  final_class: string;
  confidence: number;
  created_at: string;
}

export interface Chunk {
  chunk_id: string;
  attack_class: string;
  doc_path: string;
  start_offset: number;
  text: string;
}

export interface ScoredChunk {
  chunk: Chunk;
  relevance: number;
  mmr_score: number;
}

export interface TraceStep {
  step_index: number;
  probed_class: string;
  retrieved_count: number;
  llm_decision: string;
  llm_raw: string;
}

export interface FeatureVector {
  [name: string]: number;
}

export interface Verdict {
  payload_id: string;
  final_class: string;
  candidate_class: string;
  confidence: number;
  justification: string;
  evidence: ScoredChunk[];
  feature_vector: FeatureVector;
  iterations: number;
  trace: TraceStep[];
}

export interface ReportSections {
  analytical_summary: string[];
  conclusion: string;
  /** rows of [feature name, value, bucket] */
  feature_vector_summary: [string, number, string][];
  reasoning: string;
}

export interface ReportDocument {
  report_id: string;
  alert_id: string;
  created_at: string;
  sections: ReportSections;
  format_version: string;
}

export interface PayloadRecord {
  id: string;
  raw: string;
  normalized: string;
  source: string | null;
}

export interface StoredReport {
  alert_id: string;
  report: ReportDocument;
  verdict: Verdict;
  payload: PayloadRecord;
}

export type Expertise = "novice" | "intermediate" | "advanced";

export interface TranscriptEntry {
  role: "analyst" | "assistant" | "error";
  text: string;
}
