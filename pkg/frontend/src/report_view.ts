/** Report viewer: four titled section cards, evidence drawer, trace timeline. */

import type { StoredReport } from "./types.js";

export const SECTION_TITLES: [keyof StoredReport["report"]["sections"], string][] = [
  ["analytical_summary", "Analytical Summary"],
  ["conclusion", "Conclusion"],
  ["feature_vector_summary", "Feature Vector Summary"],
  ["reasoning", "Reasoning"],
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function summaryCard(findings: string[]): HTMLElement {
  const body = el("div", "card-body");
  const list = el("ul", "findings");
  for (const finding of findings) {
    list.appendChild(el("li", "finding", finding));
  }
  body.appendChild(list);
  return body;
}

function featureTable(rows: [string, number, string][]): HTMLElement {
  const table = el("table", "feature-table");
  const head = el("tr");
  for (const title of ["Feature", "Value", "Level"]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  for (const [name, value, bucket] of rows) {
    const row = el("tr");
    row.appendChild(el("td", "feature-name", name));
    row.appendChild(el("td", "feature-value", String(value)));
    row.appendChild(el("td", `feature-bucket bucket-${bucket.toLowerCase()}`, bucket));
    table.appendChild(row);
  }
  return table;
}

function evidenceDrawer(record: StoredReport): HTMLElement {
  const drawer = el("section", "evidence-drawer");
  drawer.appendChild(el("h3", undefined, "Evidence"));
  for (const scored of record.verdict.evidence) {
    const item = el("article", "evidence-chunk");
    item.id = `evidence-${scored.chunk.chunk_id}`;
    item.appendChild(el("h4", "evidence-id", scored.chunk.chunk_id));
    item.appendChild(el("p", "evidence-path", scored.chunk.doc_path));
    item.appendChild(el("p", "evidence-text", scored.chunk.text));
    drawer.appendChild(item);
  }
  return drawer;
}

function traceTimeline(record: StoredReport): HTMLElement {
  const timeline = el("ol", "trace-timeline");
  for (const step of record.verdict.trace) {
    const item = el("li", `trace-step decision-${step.llm_decision}`);
    item.appendChild(el("span", "trace-class", step.probed_class));
    item.appendChild(el("span", "trace-decision", step.llm_decision));
    item.appendChild(
      el("span", "trace-retrieved", `${step.retrieved_count} chunks retrieved`),
    );
    timeline.appendChild(item);
  }
  return timeline;
}

/** Build the full report view for one stored report. */
export function renderReportView(record: StoredReport): HTMLElement {
  const root = el("div", "report-view");
  const isAttack = record.verdict.final_class !== "none";

  const header = el("header", "report-header");
  header.appendChild(el("h2", undefined, `Alert ${record.alert_id}`));
  header.appendChild(el("span", `class-badge class-${record.verdict.final_class}`,
    record.verdict.final_class));
  header.appendChild(el("span", "confidence",
    `confidence ${record.verdict.confidence.toFixed(4)}`));
  header.appendChild(el("code", "payload-excerpt", record.payload.raw.slice(0, 256)));
  root.appendChild(header);

  const sections = record.report.sections;
  for (const [key, title] of SECTION_TITLES) {
    const card = el("section", "card");
    card.dataset.section = key;
    card.appendChild(el("h3", "card-title", title));
    if (key === "analytical_summary") {
      card.appendChild(summaryCard(sections.analytical_summary));
      if (isAttack) {
        // one citation link per evidence chunk
        const citations = el("p", "citations");
        record.verdict.evidence.forEach((scored, i) => {
          const link = el("a", "citation", `[${i + 1}]`);
          link.href = `#evidence-${scored.chunk.chunk_id}`;
          citations.appendChild(link);
        });
        card.appendChild(citations);
      }
    } else if (key === "feature_vector_summary") {
      card.appendChild(featureTable(sections.feature_vector_summary));
    } else if (key === "conclusion") {
      card.appendChild(el("p", "card-body", sections.conclusion));
    } else {
      card.appendChild(el("p", "card-body", sections.reasoning));
    }
    root.appendChild(card);
  }

  if (record.verdict.trace.length > 0) {
    const trace = el("section", "card trace-card");
    trace.appendChild(el("h3", "card-title", "Verification Trace"));
    trace.appendChild(traceTimeline(record));
    root.appendChild(trace);
  }
  if (isAttack && record.verdict.evidence.length > 0) {
    root.appendChild(evidenceDrawer(record));
  }
  return root;
}

/** Inline banner for fetch failures; the view is never left blank. */
export function renderRetryBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "retry-banner");
  banner.appendChild(el("span", "retry-message", message));
  const button = el("button", "retry-button", "Retry");
  button.addEventListener("click", onRetry);
  banner.appendChild(button);
  return banner;
}
