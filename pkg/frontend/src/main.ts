/** App shell: hash routing, alert queue, report view, chat panel. */

import { ApiClient } from "./api.js";
import { ChatPanel } from "./chat_panel.js";
import { renderReportView, renderRetryBanner } from "./report_view.js";
import type { AlertSummary } from "./types.js";

function selectedAlertId(): string | null {
  const match = window.location.hash.match(/^#\/alerts\/(.+)$/);
  return match ? decodeURIComponent(match[1]) : null;
}

function renderQueue(alerts: AlertSummary[]): HTMLElement {
  const list = document.createElement("ul");
  list.className = "alert-queue";
  for (const alert of alerts) {
    const item = document.createElement("li");
    item.className = `alert-row class-${alert.final_class}`;
    const link = document.createElement("a");
    link.href = `#/alerts/${encodeURIComponent(alert.alert_id)}`;
    link.textContent =
      `${alert.alert_id} — ${alert.final_class} ` +
      `(${alert.confidence.toFixed(2)}) ${alert.created_at}`;
    item.appendChild(link);
    list.appendChild(item);
  }
  return list;
}

export async function renderApp(root: HTMLElement, api: ApiClient): Promise<void> {
  root.replaceChildren();
  const alertId = selectedAlertId();

  try {
    if (alertId === null) {
      const { alerts } = await api.listAlerts();
      const heading = document.createElement("h1");
      heading.textContent = "Alert Queue";
      root.appendChild(heading);
      root.appendChild(renderQueue(alerts));
      return;
    }
    const record = await api.getReport(alertId);
    root.appendChild(renderReportView(record));
    // chat is available only once a report is on screen
    root.appendChild(new ChatPanel(api, alertId).root);
  } catch (error) {
    root.appendChild(
      renderRetryBanner(
        error instanceof Error ? error.message : String(error),
        () => void renderApp(root, api),
      ),
    );
  }
}

export function start(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const api = new ApiClient("");
  window.addEventListener("hashchange", () => void renderApp(root, api));
  void renderApp(root, api);
}

// auto-start only in a real browser page, not under test
if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
