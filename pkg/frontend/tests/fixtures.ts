/** Shared mock data shaped like the service's JSON responses. */

import type { StoredReport } from "../src/types.js";

export function sqliReport(evidenceCount = 2): StoredReport {
  const evidence = Array.from({ length: evidenceCount }, (_, i) => ({
    chunk: {
      chunk_id: `sqli:overview.md:${i * 720}`,
      attack_class: "sqli",
      doc_path: "sqli/overview.md",
      start_offset: i * 720,
      text: `chunk text ${i}`,
    },
    relevance: 0.9 - i * 0.1,
    mmr_score: 0.9 - i * 0.1,
  }));
  return {
    alert_id: "alert-1",
    report: {
      report_id: "rpt-alert-1",
      alert_id: "alert-1",
      created_at: "2026-08-26T00:00:00+00:00",
      format_version: "1",
      sections: {
        analytical_summary: [
          "String encapsulation: a quote-break sequence opens an injected condition.",
          "Time-delay primitive: waitfor/sleep patterns commonly used in blind SQL injection.",
        ],
        conclusion:
          "The payload presents a high-confidence match with known SQL Injection signatures.",
        feature_vector_summary: [
          ["sql_keywords_count", 3, "High"],
          ["sql_syntax_match", 1, "High"],
          ["template_marker_count", 0, "None"],
        ],
        reasoning: "The query matches known SQL injection shapes.",
      },
    },
    verdict: {
      payload_id: "p1",
      final_class: "sqli",
      candidate_class: "sqli",
      confidence: 0.9999,
      justification: "The query matches known SQL injection shapes.",
      evidence,
      feature_vector: { sql_keywords_count: 3, sql_syntax_match: 1 },
      iterations: 1,
      trace: [
        {
          step_index: 1,
          probed_class: "sqli",
          retrieved_count: evidenceCount,
          llm_decision: "confirm",
          llm_raw: "CONFIRM sqli",
        },
      ],
    },
    payload: {
      id: "p1",
      raw: "1' and 1=1 waitfor delay '0:0:5' --",
      normalized: "1' and 1=1 waitfor delay '0:0:5' --",
      source: "ids",
    },
  };
}

export function benignReport(): StoredReport {
  const record = sqliReport(0);
  record.verdict.final_class = "none";
  record.verdict.candidate_class = "none";
  record.verdict.confidence = 0;
  record.verdict.trace = [];
  record.report.sections.analytical_summary = [];
  record.report.sections.conclusion =
    "No classifier crossed the confidence gate and no attack indicators were found. " +
    "The payload is treated as benign traffic.";
  return record;
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
